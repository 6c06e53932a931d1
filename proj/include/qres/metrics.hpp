#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace qres {

struct MetricsReport {
  double nmse = 0.0;
  double nmse_var = 0.0;
  double mean_target = 0.0;
  double var_target = 0.0;
  std::int64_t n_points = 0;
};

/// sum (p - y)^2 / sum y^2
double nmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

/// sum (p - y)^2 / sum (y - mean(y))^2
double nmse_var(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

/// Both error measures plus the target moments (population variance).
MetricsReport evaluate(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

/// Bessel-corrected sample standard deviation.
double trial_std(std::span<const double> values);

struct TrialSummary {
  double mean = 0.0;
  std::optional<double> std;  // absent for a single trial
  double min = 0.0;
  double max = 0.0;
  std::size_t n_trials = 0;
};

TrialSummary aggregate_trials(std::span<const MetricsReport> reports);

nlohmann::json to_json(const MetricsReport& r);
nlohmann::json to_json(const TrialSummary& s);

}  // namespace qres
