#include "qres/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "qres/errors.hpp"

namespace qres {

namespace {

void check_pair(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  if (pred.size() != target.size()) throw DimensionError("prediction and target lengths differ");
  if (pred.size() == 0) throw DimensionError("error measures need at least one point");
}

}  // namespace

double nmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  check_pair(pred, target);
  const double energy = target.squaredNorm();
  if (energy == 0.0) throw DomainError("NMSE undefined: target signal is identically zero");
  return (pred - target).squaredNorm() / energy;
}

double nmse_var(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  check_pair(pred, target);
  const double spread = (target.array() - target.mean()).square().sum();
  if (spread == 0.0) throw DomainError("variance-normalized NMSE undefined: target is constant");
  return (pred - target).squaredNorm() / spread;
}

MetricsReport evaluate(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  MetricsReport r;
  r.nmse = nmse(pred, target);
  r.nmse_var = nmse_var(pred, target);
  r.mean_target = target.mean();
  r.var_target = (target.array() - r.mean_target).square().mean();
  r.n_points = target.size();
  return r;
}

double trial_std(std::span<const double> values) {
  if (values.size() < 2) throw DomainError("standard deviation needs at least 2 trials");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

TrialSummary aggregate_trials(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw DomainError("cannot aggregate an empty trial list");
  std::vector<double> v;
  v.reserve(reports.size());
  for (const auto& r : reports) v.push_back(r.nmse);
  TrialSummary s;
  s.n_trials = v.size();
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  s.min = *lo;
  s.max = *hi;
  if (v.size() >= 2) s.std = trial_std(v);
  return s;
}

nlohmann::json to_json(const MetricsReport& r) {
  return {{"nmse", r.nmse},
          {"nmse_var", r.nmse_var},
          {"mean_target", r.mean_target},
          {"var_target", r.var_target},
          {"n_points", r.n_points}};
}

nlohmann::json to_json(const TrialSummary& s) {
  nlohmann::json j = {{"mean", s.mean}, {"min", s.min}, {"max", s.max}, {"n_trials", s.n_trials}};
  j["std"] = s.std ? nlohmann::json(*s.std) : nlohmann::json(nullptr);
  return j;
}

}  // namespace qres
