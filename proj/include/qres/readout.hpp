#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace qres {

/// Raised alongside (not instead of) a minimum-norm solution.
struct ConditioningWarning {
  Eigen::Index rank = 0;
  Eigen::Index columns = 0;
  std::string message() const;
};

struct ReadoutWeights {
  /// Feature weights followed by the intercept when `bias_enabled`.
  Eigen::VectorXd weights;
  bool bias_enabled = true;
  std::optional<ConditioningWarning> warning;

  Eigen::Index n_features() const { return weights.size() - (bias_enabled ? 1 : 0); }
};

/// argmin_w |X w - y|^2 + ridge |w|^2 by complete orthogonal decomposition
/// (minimum-norm when X is rank deficient). The intercept is not penalized.
ReadoutWeights train(const Eigen::MatrixXd& x, const Eigen::VectorXd& targets, bool bias = true, double ridge = 0.0);

Eigen::VectorXd predict(const Eigen::MatrixXd& x, const ReadoutWeights& w);

nlohmann::json to_json(const ReadoutWeights& w, const std::string& training_config_hash = {});
ReadoutWeights weights_from_json(const nlohmann::json& j);

}  // namespace qres
