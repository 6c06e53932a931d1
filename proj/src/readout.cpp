#include "qres/readout.hpp"

#include <cmath>

#include "qres/errors.hpp"

namespace qres {

std::string ConditioningWarning::message() const {
  return "design matrix is rank deficient (estimated rank " + std::to_string(rank) + " of " +
         std::to_string(columns) + " columns); returning the minimum-norm solution";
}

namespace {

Eigen::MatrixXd with_bias(const Eigen::MatrixXd& x, bool bias) {
  if (!bias) return x;
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out << x, Eigen::VectorXd::Ones(x.rows());
  return out;
}

}  // namespace

ReadoutWeights train(const Eigen::MatrixXd& x, const Eigen::VectorXd& targets, bool bias, double ridge) {
  if (x.rows() != targets.size()) {
    throw DimensionError("feature rows " + std::to_string(x.rows()) + " != target count " +
                         std::to_string(targets.size()));
  }
  if (x.rows() == 0) throw DimensionError("cannot train on zero rows");
  if (!(ridge >= 0.0)) throw DomainError("ridge must be non-negative");
  if (!x.allFinite() || !targets.allFinite()) throw DomainError("training data contains non-finite values");

  const Eigen::MatrixXd design = with_bias(x, bias);
  ReadoutWeights w;
  w.bias_enabled = bias;

  if (ridge == 0.0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    w.weights = cod.solve(targets);
    if (cod.rank() < design.cols()) w.warning = ConditioningWarning{cod.rank(), design.cols()};
  } else {
    // Stack sqrt(ridge) I under the weight columns (not the intercept).
    const Eigen::Index p = design.cols();
    const Eigen::Index penalized = x.cols();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(design.rows() + penalized, p);
    aug.topRows(design.rows()) = design;
    aug.bottomLeftCorner(penalized, penalized).diagonal().setConstant(std::sqrt(ridge));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(aug.rows());
    rhs.head(targets.size()) = targets;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(aug);
    w.weights = cod.solve(rhs);
    if (cod.rank() < p) w.warning = ConditioningWarning{cod.rank(), p};
  }
  if (!w.weights.allFinite()) throw NumericalError("readout solve produced non-finite weights");
  return w;
}

Eigen::VectorXd predict(const Eigen::MatrixXd& x, const ReadoutWeights& w) {
  if (x.cols() != w.n_features()) {
    throw DimensionError("feature columns " + std::to_string(x.cols()) + " != trained feature count " +
                         std::to_string(w.n_features()));
  }
  Eigen::VectorXd y = x * w.weights.head(w.n_features());
  if (w.bias_enabled) y.array() += w.weights(w.weights.size() - 1);
  return y;
}

nlohmann::json to_json(const ReadoutWeights& w, const std::string& training_config_hash) {
  nlohmann::json j;
  j["values"] = std::vector<double>(w.weights.data(), w.weights.data() + w.weights.size());
  j["bias"] = w.bias_enabled;
  j["training_config_hash"] = training_config_hash;
  if (w.warning) j["conditioning_warning"] = {{"rank", w.warning->rank}, {"columns", w.warning->columns}};
  return j;
}

ReadoutWeights weights_from_json(const nlohmann::json& j) {
  try {
    ReadoutWeights w;
    const auto values = j.at("values").get<std::vector<double>>();
    w.weights = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    w.bias_enabled = j.at("bias").get<bool>();
    if (w.bias_enabled && w.weights.size() == 0) throw ValidationError("bias enabled but no weights stored");
    if (!w.weights.allFinite()) throw ValidationError("stored weights are not finite");
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed weights document: ") + e.what());
  }
}

}  // namespace qres
