#pragma once

// Config-driven experiment runner behind the `qres` command line tool.
//
// Seeds. Every trial i of an ensemble gets three independent 64-bit seeds
//   reservoir_seed = derive_seed(reservoir.base_seed, kReservoirStream, i)
//   shot_seed      = derive_seed(reservoir.base_seed, kShotStream, i)
//   task_seed      = task.seed                             (seed_mode "fixed")
//                  = derive_seed(task.seed, kTaskStream, i) (seed_mode "per_trial")
// where derive_seed(base, stream, i) = splitmix64(splitmix64(base ^ stream) + i).
//
// Precedence. Command line flags override the JSON config, which overrides
// the built-in defaults.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qres/metrics.hpp"
#include "qres/noise.hpp"
#include "qres/protocols.hpp"
#include "qres/readout.hpp"
#include "qres/reservoir.hpp"
#include "qres/tasks.hpp"

namespace qres {

inline constexpr const char* kResultsSchema = "qres.results/1";
inline constexpr const char* kSweepSchema = "qres.sweep/1";

inline constexpr std::uint64_t kReservoirStream = 0x7265736572766f69ULL;
inline constexpr std::uint64_t kShotStream = 0x73686f7473686f74ULL;
inline constexpr std::uint64_t kTaskStream = 0x7461736b7461736bULL;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

/// Every problem found in a config, reported together.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Estimated runtime above the configured budget without confirmation.
class BudgetRefused : public std::runtime_error {
 public:
  BudgetRefused(double estimate_seconds, double budget_seconds);
  double estimate_seconds;
  double budget_seconds;
};

enum class Model { LR, QRC, TDQELM };
std::string to_string(Model m);

enum class GraphKind { Full, Kawasaki };
enum class SeedMode { Fixed, PerTrial };

struct ExperimentConfig {
  Model model = Model::TDQELM;
  std::string label;

  std::int64_t length = 1000;
  std::uint64_t task_seed = 0;
  SeedMode seed_mode = SeedMode::Fixed;
  /// Read inputs from a task CSV instead of generating them.
  std::optional<std::filesystem::path> task_path;

  int n_virtual = 1;
  std::optional<std::int64_t> n_shots = 8192;
  ReplayMode replay = ReplayMode::SharedPrefix;
  bool validate_states = false;

  GraphKind graph = GraphKind::Full;
  int n_sites = 6;
  double field = kDefaultField;
  double evolution_time = 1.0;
  EvolutionBackend backend = EvolutionBackend::TrotterOneStep;
  int ensemble_size = 10;
  std::uint64_t base_seed = 0;

  std::vector<int> taps = {0, 1, 2, 9, 10, 11};
  NoiseParams noise;
  SplitSpec split;
  bool bias = true;
  double ridge = 0.0;
  int lr_features = 30;

  int workers = 1;
  double max_seconds = 600.0;

  std::filesystem::path out_dir = ".";
  std::string prefix = "run";
  /// "none", "first" (trial 0 only) or "all".
  std::string write_states = "first";
};

/// Parses and validates; throws ConfigError listing every problem.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
/// Semantic checks on an already parsed config (collects, does not throw).
std::vector<std::string> check(const ExperimentConfig& c);

struct TrialSeeds {
  std::uint64_t task = 0;
  std::uint64_t reservoir = 0;
  std::uint64_t shot = 0;
};

TrialSeeds trial_seeds(const ExperimentConfig& c, int trial);

/// The reservoir a trial uses.
ReservoirSpec trial_reservoir(const ExperimentConfig& c, int trial);

struct TrialResult {
  int index = 0;
  TrialSeeds seeds;
  std::optional<MetricsReport> metrics;
  std::string skipped_reason;
  ExecutionLedger ledger;
  std::int64_t feature_rows = 0;
  std::int64_t feature_cols = 0;
  SplitRanges ranges;
  std::optional<ConditioningWarning> warning;
  /// Features with timestep labels; kept only when exported.
  std::optional<Eigen::MatrixXd> features;
  std::int64_t first_t = 0;
  std::vector<std::string> column_names;
};

TrialResult run_trial(const ExperimentConfig& c, int trial, bool keep_features = false);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  std::optional<TrialSummary> summary;
  ExecutionLedger ledger;
  double wall_seconds = 0.0;
};

/// Runs all trials on `workers` threads; results are ordered by trial index.
ExperimentResult run_experiment(const ExperimentConfig& c);

nlohmann::json to_json(const ExperimentResult& r);

/// Rough wall-clock estimate from timing a few simulated steps.
double estimate_seconds(const ExperimentConfig& c);
void enforce_budget(const ExperimentConfig& c, bool confirmed);

/// Writes <prefix>_results.json and the requested state-matrix CSV/JSON pairs.
std::vector<std::filesystem::path> write_outputs(const ExperimentResult& r);

void write_state_csv(const std::filesystem::path& path, const Eigen::MatrixXd& values, std::int64_t first_t,
                     const std::vector<std::string>& column_names);

enum class SweepAxis { InputLength, ReadoutDim };
SweepAxis parse_sweep_axis(const std::string& tag);
std::string to_string(SweepAxis a);

/// The config for one sweep point; readout_dim sets N_R directly for LR and
/// N_V = N_R / N_S for the quantum models.
ExperimentConfig sweep_point(const ExperimentConfig& base, SweepAxis axis, std::int64_t value);

struct SweepResult {
  SweepAxis axis;
  std::vector<std::int64_t> values;
  std::vector<ExperimentResult> points;
};

SweepResult run_sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::int64_t>& values,
                      bool confirmed);
nlohmann::json to_json(const SweepResult& s);
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& s);

struct CompareTable {
  std::vector<std::string> columns;  // "<model>/<condition>"
  std::vector<std::int64_t> lengths;
  /// cells[row][col], absent entries rendered as "--".
  std::vector<std::vector<std::optional<double>>> cells;
  std::vector<std::string> warnings;
};

/// Joins result or sweep documents into a length x (model, condition) grid.
CompareTable compare_results(const std::vector<nlohmann::json>& documents);
void write_compare_csv(const std::filesystem::path& path, const CompareTable& t);
std::string render_compare(const CompareTable& t);

}  // namespace qres
