#include "qres/tasks.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qres/errors.hpp"
#include "qres/io.hpp"

namespace qres {

TaskData narma10_from_inputs(std::vector<double> inputs) {
  const std::size_t m = inputs.size();
  for (std::size_t t = 0; t < m; ++t) {
    if (!(inputs[t] >= 0.0 && inputs[t] <= 1.0)) {
      throw DomainError("NARMA10 input " + std::to_string(inputs[t]) + " at timestep " + std::to_string(t) +
                        " is outside [0, 1]");
    }
  }
  // y has one extra slot: targets[t] = y[t + 1].
  std::vector<double> y(m + 1, 0.0);
  double window = 0.0;  // sum_{d=0}^{9} y_{t-d}
  for (std::size_t t = 0; t < m; ++t) {
    window += y[t];
    if (t >= 10) window -= y[t - 10];
    if (t < 9) continue;
    y[t + 1] = 0.3 * y[t] + 0.05 * y[t] * window + 1.5 * inputs[t] * inputs[t - 9] + 0.1;
    if (!std::isfinite(y[t + 1]) || std::abs(y[t + 1]) > kNarmaDivergence) {
      throw NumericalError("NARMA10 recursion diverged at timestep " + std::to_string(t + 1));
    }
  }
  TaskData task;
  task.inputs = std::move(inputs);
  task.targets.assign(y.begin() + 1, y.end());
  return task;
}

TaskData generate_narma10(std::int64_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return generate_narma10(m, rng);
}

std::vector<double> draw_narma_inputs(std::int64_t m, std::uint64_t seed) {
  if (m < 0) throw ValidationError("sequence length must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> input(0.0, kNarmaInputMax);
  std::vector<double> s(static_cast<std::size_t>(m));
  for (double& v : s) v = input(rng);
  return s;
}

FeatureMatrix lr_features(std::span<const double> inputs, int n_features) {
  if (n_features < 1) throw ValidationError("n_features must be at least 1");
  const auto m = static_cast<std::int64_t>(inputs.size());
  if (m < n_features) {
    throw ValidationError("sequence of length " + std::to_string(m) + " is too short for " +
                          std::to_string(n_features) + " delay features");
  }
  FeatureMatrix f;
  f.first_t = n_features - 1;
  f.values.resize(m - f.first_t, n_features);
  for (std::int64_t t = f.first_t; t < m; ++t)
    for (int d = 0; d < n_features; ++d) f.values(t - f.first_t, d) = inputs[static_cast<std::size_t>(t - d)];
  return f;
}

void validate(const SplitSpec& spec) {
  if (spec.washout < 0.0 || spec.train < 0.0 || spec.test < 0.0) {
    throw ValidationError("split fractions must be non-negative");
  }
  const double sum = spec.washout + spec.train + spec.test;
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("split fractions sum to " + std::to_string(sum) + ", expected 1");
  }
  if (spec.train == 0.0) throw ValidationError("train fraction must be positive");
}

SplitRanges split(std::int64_t rows, const SplitSpec& spec) {
  validate(spec);
  // 0.7 * 30 evaluates to 20.999999999999996; nudge before flooring.
  auto floor_frac = [rows](double f) {
    return static_cast<std::int64_t>(std::floor(f * static_cast<double>(rows) + 1e-9));
  };
  const std::int64_t w = floor_frac(spec.washout);
  const std::int64_t tr = floor_frac(spec.train);
  SplitRanges r{{0, w}, {w, w + tr}, {w + tr, rows}};
  auto require = [](double frac, const IndexRange& range, const char* name) {
    if (frac > 0.0 && range.size() <= 0) {
      throw ValidationError(std::string(name) + " segment is empty; need more rows");
    }
  };
  require(spec.washout, r.washout, "washout");
  require(spec.train, r.train, "train");
  require(spec.test, r.test, "test");
  return r;
}

void write_task_csv(const std::filesystem::path& path, const TaskData& task) {
  CsvWriter csv(path);
  csv.row({"t", "s", "y"});
  for (std::int64_t t = 0; t < task.length(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    csv.row({std::to_string(t), format_double(task.inputs[i]), format_double(task.targets[i])});
  }
}

TaskData read_task_csv(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  if (rows.empty() || rows.front() != std::vector<std::string>{"t", "s", "y"}) {
    throw ValidationError("task file " + path.string() + " must start with header t,s,y");
  }
  TaskData task;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 3) throw ValidationError("task file row " + std::to_string(r) + " needs 3 fields");
    long long t = 0;
    try {
      std::size_t used = 0;
      t = std::stoll(rows[r][0], &used);
      if (used != rows[r][0].size()) throw std::invalid_argument("trailing characters");
      task.inputs.push_back(std::stod(rows[r][1]));
      task.targets.push_back(std::stod(rows[r][2]));
    } catch (const std::logic_error&) {
      throw ValidationError("task file row " + std::to_string(r) + " has a non-numeric field");
    }
    if (t != static_cast<long long>(r - 1)) {
      throw ValidationError("task file row " + std::to_string(r) + " is out of order");
    }
  }
  return task;
}

}  // namespace qres
