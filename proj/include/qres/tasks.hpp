#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qres/errors.hpp"

namespace qres {

/// NARMA10 inputs and aligned targets: targets[t] = y_{t+1}.
struct TaskData {
  std::vector<double> inputs;
  std::vector<double> targets;

  std::int64_t length() const { return static_cast<std::int64_t>(inputs.size()); }
};

inline constexpr double kNarmaInputMax = 0.2;
inline constexpr double kNarmaDivergence = 10.0;

/// Runs the NARMA10 recursion
///   y_{t+1} = 0.3 y_t + 0.05 y_t sum_{d=0}^{9} y_{t-d} + 1.5 s_t s_{t-9} + 0.1
/// from y_0 = ... = y_9 = 0 on the given inputs. Throws NumericalError if |y| > 10.
TaskData narma10_from_inputs(std::vector<double> inputs);

/// s_t ~ U[0, 0.2] drawn from `rng`, then the NARMA10 recursion.
template <typename Rng>
TaskData generate_narma10(std::int64_t m, Rng& rng) {
  if (m < 12) throw ValidationError("NARMA10 needs at least 12 timesteps");
  std::uniform_real_distribution<double> input(0.0, kNarmaInputMax);
  std::vector<double> s(static_cast<std::size_t>(m));
  for (double& v : s) v = input(rng);
  return narma10_from_inputs(std::move(s));
}

TaskData generate_narma10(std::int64_t m, std::uint64_t seed);

/// The first m inputs generate_narma10(·, seed) would use, for any m >= 0.
std::vector<double> draw_narma_inputs(std::int64_t m, std::uint64_t seed);

/// Sliding-window baseline features with their first timestep index.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::int64_t first_t = 0;
};

/// Row for timestep t = (s_t, s_{t-1}, ..., s_{t-N_R+1}); first row at t = N_R - 1.
FeatureMatrix lr_features(std::span<const double> inputs, int n_features);

struct SplitSpec {
  double washout = 0.1;
  double train = 0.7;
  double test = 0.2;
};

void validate(const SplitSpec& spec);

struct IndexRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  std::int64_t size() const { return end - begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct SplitRanges {
  IndexRange washout;
  IndexRange train;
  IndexRange test;
};

/// Contiguous washout | train | test. Washout and train get floor(frac * rows);
/// test takes the remainder. A segment with a positive fraction must be non-empty.
SplitRanges split(std::int64_t rows, const SplitSpec& spec);

void write_task_csv(const std::filesystem::path& path, const TaskData& task);
TaskData read_task_csv(const std::filesystem::path& path);

}  // namespace qres
