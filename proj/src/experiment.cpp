#include "qres/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "qres/io.hpp"

namespace qres {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(base ^ stream) + index);
}

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid configuration:";
  for (const auto& p : problems) out += "\n  - " + p;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : ValidationError(join_problems(problems)), problems_(std::move(problems)) {}

BudgetRefused::BudgetRefused(double estimate, double budget)
    : std::runtime_error("estimated runtime " + std::to_string(estimate) + " s exceeds the budget of " +
                         std::to_string(budget) + " s; rerun with --confirm-budget to proceed"),
      estimate_seconds(estimate),
      budget_seconds(budget) {}

std::string to_string(Model m) {
  switch (m) {
    case Model::LR: return "lr";
    case Model::QRC: return "qrc";
    case Model::TDQELM: return "tdqelm";
  }
  return "?";
}

namespace {

using nlohmann::json;

std::string to_string(GraphKind g) { return g == GraphKind::Full ? "full" : "kawasaki"; }
std::string to_string(SeedMode s) { return s == SeedMode::Fixed ? "fixed" : "per_trial"; }

// Reads typed fields out of one JSON object, recording every problem instead
// of stopping at the first.
class Reader {
 public:
  Reader(const json* j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (j_ && !j_->is_object()) {
      errors_.push_back(where("") + "must be an object");
      j_ = nullptr;
    }
  }

  ~Reader() {
    if (!j_) return;
    for (const auto& [key, _] : j_->items()) {
      if (!seen_.count(key)) errors_.push_back(where(key) + "unknown key");
    }
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    const json* c = (j_ && j_->contains(key)) ? &(*j_)[key] : nullptr;
    return Reader(c, path_.empty() ? key : path_ + "." + key, errors_);
  }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    return (j_ && j_->contains(key)) ? &(*j_)[key] : nullptr;
  }

  void integer(const std::string& key, std::int64_t& out) {
    if (const json* v = raw(key)) {
      if (v->is_number_integer()) out = v->get<std::int64_t>();
      else errors_.push_back(where(key) + "expected an integer");
    }
  }

  void integer(const std::string& key, int& out) {
    std::int64_t wide = out;
    integer(key, wide);
    if (wide < INT32_MIN || wide > INT32_MAX) errors_.push_back(where(key) + "out of range");
    else out = static_cast<int>(wide);
  }

  void seed(const std::string& key, std::uint64_t& out) {
    if (const json* v = raw(key)) {
      if (v->is_number_unsigned()) out = v->get<std::uint64_t>();
      else if (v->is_number_integer() && v->get<std::int64_t>() >= 0) out = static_cast<std::uint64_t>(v->get<std::int64_t>());
      else errors_.push_back(where(key) + "expected a non-negative integer seed");
    }
  }

  void number(const std::string& key, double& out) {
    if (const json* v = raw(key)) {
      if (v->is_number()) out = v->get<double>();
      else errors_.push_back(where(key) + "expected a number");
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = raw(key)) {
      if (v->is_boolean()) out = v->get<bool>();
      else errors_.push_back(where(key) + "expected true or false");
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = raw(key)) {
      if (v->is_string()) out = v->get<std::string>();
      else errors_.push_back(where(key) + "expected a string");
    }
  }

  template <typename E>
  void choice(const std::string& key, E& out, const std::vector<std::pair<std::string, E>>& options) {
    const json* v = raw(key);
    if (!v) return;
    if (!v->is_string()) {
      errors_.push_back(where(key) + "expected a string");
      return;
    }
    const std::string tag = v->get<std::string>();
    for (const auto& [name, value] : options) {
      if (name == tag) {
        out = value;
        return;
      }
    }
    std::string allowed;
    for (const auto& [name, _] : options) allowed += (allowed.empty() ? "" : "|") + name;
    errors_.push_back(where(key) + "unknown value '" + tag + "' (expected " + allowed + ")");
  }

  std::string where(const std::string& key) const {
    std::string p = path_;
    if (!key.empty()) p += (p.empty() ? "" : ".") + key;
    return (p.empty() ? "config" : p) + ": ";
  }

  std::vector<std::string>& errors() { return errors_; }

 private:
  const json* j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  std::vector<std::string> errors;
  {
    Reader root(&j, "", errors);
    root.choice<Model>("model", c.model, {{"lr", Model::LR}, {"qrc", Model::QRC}, {"tdqelm", Model::TDQELM}});
    root.string("label", c.label);
    root.integer("workers", c.workers);
    root.integer("trials", c.ensemble_size);
    {
      Reader t = root.child("task");
      t.integer("length", c.length);
      t.seed("seed", c.task_seed);
      t.choice<SeedMode>("seed_mode", c.seed_mode, {{"fixed", SeedMode::Fixed}, {"per_trial", SeedMode::PerTrial}});
      std::string path;
      t.string("path", path);
      if (!path.empty()) c.task_path = path;
    }
    {
      Reader p = root.child("protocol");
      p.integer("n_virtual", c.n_virtual);
      if (const json* shots = p.raw("n_shots")) {
        if (shots->is_string() && shots->get<std::string>() == "exact") c.n_shots.reset();
        else if (shots->is_null()) c.n_shots.reset();
        else if (shots->is_number_integer()) c.n_shots = shots->get<std::int64_t>();
        else errors.push_back("protocol.n_shots: expected a positive integer or \"exact\"");
      }
      p.choice<ReplayMode>("replay", c.replay,
                           {{"shared_prefix", ReplayMode::SharedPrefix}, {"full_restart", ReplayMode::FullRestart}});
      p.boolean("validate_states", c.validate_states);
    }
    {
      Reader r = root.child("reservoir");
      r.choice<GraphKind>("graph", c.graph, {{"full", GraphKind::Full}, {"kawasaki", GraphKind::Kawasaki}});
      r.integer("n_sites", c.n_sites);
      r.number("h", c.field);
      r.number("T", c.evolution_time);
      r.choice<EvolutionBackend>("backend", c.backend,
                                 {{"exact", EvolutionBackend::Exact}, {"trotter", EvolutionBackend::TrotterOneStep}});
      r.integer("ensemble_size", c.ensemble_size);
      r.seed("base_seed", c.base_seed);
    }
    if (const json* taps = root.raw("taps")) {
      if (taps->is_array() && std::all_of(taps->begin(), taps->end(), [](const json& v) { return v.is_number_integer(); }))
        c.taps = taps->get<std::vector<int>>();
      else
        errors.push_back("taps: expected an array of integers");
    }
    {
      Reader n = root.child("noise");
      n.boolean("enabled", c.noise.enabled);
      n.number("depolarizing_1q", c.noise.depolarizing_1q);
      n.number("depolarizing_2q", c.noise.depolarizing_2q);
      n.number("readout_flip", c.noise.readout_flip);
    }
    {
      Reader s = root.child("split");
      s.number("washout", c.split.washout);
      s.number("train", c.split.train);
      s.number("test", c.split.test);
    }
    {
      Reader r = root.child("readout");
      r.boolean("bias", c.bias);
      r.number("ridge", c.ridge);
    }
    {
      Reader l = root.child("lr");
      l.integer("n_features", c.lr_features);
    }
    {
      Reader b = root.child("budget");
      b.number("max_seconds", c.max_seconds);
    }
    {
      Reader o = root.child("output");
      std::string dir;
      o.string("dir", dir);
      if (!dir.empty()) c.out_dir = dir;
      o.string("prefix", c.prefix);
      o.string("write_states", c.write_states);
    }
    // Consumed by the sweep subcommand; accepted here so one file can drive both.
    root.raw("sweep");
  }
  for (auto& p : check(c)) errors.push_back(std::move(p));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

std::vector<std::string> check(const ExperimentConfig& c) {
  std::vector<std::string> e;
  const bool quantum = c.model != Model::LR;
  if (!c.task_path && c.length < 1) e.push_back("task.length: must be at least 1");
  if (c.task_path && !std::filesystem::exists(*c.task_path))
    e.push_back("task.path: " + c.task_path->string() + " does not exist");
  if (c.ensemble_size < 1) e.push_back("reservoir.ensemble_size: must be at least 1");
  if (c.workers < 1) e.push_back("workers: must be at least 1");
  if (!(c.max_seconds > 0.0)) e.push_back("budget.max_seconds: must be positive");
  if (!(c.ridge >= 0.0) || !std::isfinite(c.ridge)) e.push_back("readout.ridge: must be finite and non-negative");
  try {
    validate(c.split);
  } catch (const std::exception& ex) {
    e.push_back(std::string("split: ") + ex.what());
  }
  if (c.prefix.empty() || c.prefix.find_first_of("/\\") != std::string::npos)
    e.push_back("output.prefix: must be a non-empty file name prefix");
  if (c.write_states != "none" && c.write_states != "first" && c.write_states != "all")
    e.push_back("output.write_states: expected none|first|all");

  if (c.model == Model::LR) {
    if (c.lr_features < 1) e.push_back("lr.n_features: must be at least 1");
    else if (!c.task_path && c.length <= c.lr_features)
      e.push_back("task.length: must exceed lr.n_features (" + std::to_string(c.lr_features) + ")");
  }
  if (quantum) {
    if (c.n_sites < 2 || c.n_sites > 10) e.push_back("reservoir.n_sites: must be between 2 and 10");
    if (c.graph == GraphKind::Kawasaki && c.n_sites != 6)
      e.push_back("reservoir.n_sites: the kawasaki graph has exactly 6 sites");
    if (!std::isfinite(c.field)) e.push_back("reservoir.h: must be finite");
    if (!(c.evolution_time > 0.0) || !std::isfinite(c.evolution_time)) e.push_back("reservoir.T: must be positive");
    if (c.n_virtual < 1) e.push_back("protocol.n_virtual: must be at least 1");
    if (c.n_shots && *c.n_shots < 1) e.push_back("protocol.n_shots: must be at least 1");
    try {
      validate(c.noise);
    } catch (const std::exception& ex) {
      e.push_back(std::string("noise: ") + ex.what());
    }
  }
  if (c.model == Model::TDQELM) {
    try {
      DelayTaps taps(c.taps);
      if (taps.size() != c.n_sites)
        e.push_back("taps: " + std::to_string(taps.size()) + " taps for " + std::to_string(c.n_sites) + " sites");
      if (!c.task_path && c.length <= taps.max())
        e.push_back("task.length: must exceed the largest tap (" + std::to_string(taps.max()) + ")");
    } catch (const std::exception& ex) {
      e.push_back(std::string("taps: ") + ex.what());
    }
  }
  return e;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = to_string(c.model);
  j["label"] = c.label;
  j["task"] = {{"length", c.length}, {"seed", c.task_seed}, {"seed_mode", to_string(c.seed_mode)}};
  if (c.task_path) j["task"]["path"] = c.task_path->string();
  j["protocol"] = {{"n_virtual", c.n_virtual},
                   {"n_shots", c.n_shots ? json(*c.n_shots) : json("exact")},
                   {"replay", to_string(c.replay)},
                   {"validate_states", c.validate_states}};
  j["reservoir"] = {{"graph", to_string(c.graph)},          {"n_sites", c.n_sites},
                    {"h", c.field},                         {"T", c.evolution_time},
                    {"backend", to_string(c.backend)},      {"ensemble_size", c.ensemble_size},
                    {"base_seed", c.base_seed}};
  j["taps"] = c.taps;
  j["noise"] = to_json(c.noise);
  j["split"] = {{"washout", c.split.washout}, {"train", c.split.train}, {"test", c.split.test}};
  j["readout"] = {{"bias", c.bias}, {"ridge", c.ridge}};
  j["lr"] = {{"n_features", c.lr_features}};
  j["workers"] = c.workers;
  j["budget"] = {{"max_seconds", c.max_seconds}};
  j["output"] = {{"dir", c.out_dir.string()}, {"prefix", c.prefix}, {"write_states", c.write_states}};
  return j;
}

TrialSeeds trial_seeds(const ExperimentConfig& c, int trial) {
  const auto i = static_cast<std::uint64_t>(trial);
  TrialSeeds s;
  s.task = c.seed_mode == SeedMode::Fixed ? c.task_seed : derive_seed(c.task_seed, kTaskStream, i);
  s.reservoir = derive_seed(c.base_seed, kReservoirStream, i);
  s.shot = derive_seed(c.base_seed, kShotStream, i);
  return s;
}

ReservoirSpec trial_reservoir(const ExperimentConfig& c, int trial) {
  ConnectivityGraph graph = c.graph == GraphKind::Full ? full_connectivity(c.n_sites) : kawasaki_subgraph();
  const std::uint64_t seed = trial_seeds(c, trial).reservoir;
  std::mt19937_64 rng(seed);
  TFIMParams params = sample_couplings(graph, c.field, c.evolution_time, rng);
  return ReservoirSpec{std::move(graph), std::move(params), c.backend, seed};
}

namespace {

std::vector<double> trial_inputs(const ExperimentConfig& c, const TrialSeeds& seeds) {
  if (c.task_path) return read_task_csv(*c.task_path).inputs;
  return draw_narma_inputs(c.length, seeds.task);
}

ProtocolConfig protocol_config(const ExperimentConfig& c, const TrialSeeds& seeds) {
  ProtocolConfig pc;
  pc.protocol = c.model == Model::QRC ? Protocol::QRC : Protocol::TDQELM;
  pc.n_virtual = c.n_virtual;
  pc.n_shots = c.n_shots;
  pc.noise = c.noise;
  pc.replay = c.replay;
  pc.validate_states = c.validate_states;
  pc.shot_seed = seeds.shot;
  return pc;
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& c, int trial, bool keep_features) {
  TrialResult r;
  r.index = trial;
  r.seeds = trial_seeds(c, trial);
  const TaskData task = narma10_from_inputs(trial_inputs(c, r.seeds));

  Eigen::MatrixXd x;
  if (c.model == Model::LR) {
    FeatureMatrix fm = lr_features(task.inputs, c.lr_features);
    x = std::move(fm.values);
    r.first_t = fm.first_t;
    for (int k = 0; k < c.lr_features; ++k) r.column_names.push_back("lag" + std::to_string(k));
  } else {
    const ReservoirSpec spec = trial_reservoir(c, trial);
    const ProtocolConfig pc = protocol_config(c, r.seeds);
    ProtocolRun run = c.model == Model::QRC ? qrc_run(task.inputs, spec, pc)
                                            : tdqelm_run(task.inputs, DelayTaps(c.taps), spec, pc);
    x = std::move(run.states.values);
    r.first_t = run.states.first_t;
    r.ledger = run.ledger;
    for (Eigen::Index col = 0; col < x.cols(); ++col) r.column_names.push_back(run.states.column_name(col));
  }
  r.feature_rows = x.rows();
  r.feature_cols = x.cols();

  Eigen::VectorXd y(x.rows());
  for (Eigen::Index row = 0; row < x.rows(); ++row) y(row) = task.targets[static_cast<std::size_t>(r.first_t + row)];

  try {
    r.ranges = split(x.rows(), c.split);
    if (r.ranges.train.size() == 0 || r.ranges.test.size() == 0)
      throw ValidationError("train and test segments must both be non-empty");
    const ReadoutWeights w =
        train(x.middleRows(r.ranges.train.begin, r.ranges.train.size()),
              y.segment(r.ranges.train.begin, r.ranges.train.size()), c.bias, c.ridge);
    r.warning = w.warning;
    const Eigen::VectorXd pred = predict(x.middleRows(r.ranges.test.begin, r.ranges.test.size()), w);
    r.metrics = evaluate(pred, y.segment(r.ranges.test.begin, r.ranges.test.size()));
  } catch (const ValidationError& ex) {
    r.skipped_reason = ex.what();
  } catch (const DomainError& ex) {
    r.skipped_reason = ex.what();
  } catch (const DimensionError& ex) {
    r.skipped_reason = ex.what();
  }
  if (keep_features) r.features = std::move(x);
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  if (auto problems = check(c); !problems.empty()) throw ConfigError(std::move(problems));
  const auto start = std::chrono::steady_clock::now();
  const int n = c.ensemble_size;
  ExperimentResult out;
  out.config = c;
  out.trials.resize(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n));

  auto keep = [&](int i) { return c.write_states == "all" || (c.write_states == "first" && i == 0); };
  auto work = [&](int i) {
    try {
      out.trials[static_cast<std::size_t>(i)] = run_trial(c, i, keep(i));
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };

  const int workers = std::min(c.workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::vector<MetricsReport> reports;
  for (const auto& t : out.trials) {
    out.ledger += t.ledger;
    if (t.metrics) reports.push_back(*t.metrics);
  }
  if (!reports.empty()) out.summary = aggregate_trials(reports);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

namespace {

json range_json(const IndexRange& r) { return json::array({r.begin, r.end}); }

json trial_json(const TrialResult& t) {
  json j;
  j["index"] = t.index;
  j["seeds"] = {{"task", t.seeds.task}, {"reservoir", t.seeds.reservoir}, {"shot", t.seeds.shot}};
  j["ledger"] = to_json(t.ledger);
  j["feature_shape"] = {t.feature_rows, t.feature_cols};
  j["first_t"] = t.first_t;
  if (t.metrics) {
    j["metrics"] = to_json(*t.metrics);
    j["split"] = {{"washout", range_json(t.ranges.washout)},
                  {"train", range_json(t.ranges.train)},
                  {"test", range_json(t.ranges.test)}};
  } else {
    j["metrics"] = nullptr;
    j["skipped"] = t.skipped_reason;
  }
  if (t.warning) j["conditioning_warning"] = t.warning->message();
  return j;
}

}  // namespace

nlohmann::json to_json(const ExperimentResult& r) {
  json j;
  j["schema"] = kResultsSchema;
  j["config"] = to_json(r.config);
  j["config_hash"] = config_hash(j["config"]);
  json trials = json::array();
  for (const auto& t : r.trials) trials.push_back(trial_json(t));
  j["trials"] = std::move(trials);
  j["summary"] = r.summary ? to_json(*r.summary) : json(nullptr);
  j["ledger"] = to_json(r.ledger);
  j["timing"] = {{"wall_seconds", r.wall_seconds}};
  return j;
}

double estimate_seconds(const ExperimentConfig& c) {
  if (auto problems = check(c); !problems.empty()) throw ConfigError(std::move(problems));
  if (c.model == Model::LR) return 0.0;

  // Time two short runs to split fixed setup cost from per-step cost.
  const int offset = c.model == Model::TDQELM ? DelayTaps(c.taps).max() : 0;
  const std::int64_t m = c.task_path ? static_cast<std::int64_t>(read_task_csv(*c.task_path).inputs.size())
                                     : c.length;
  auto steps = [&](std::int64_t len) -> double {
    const double valid = static_cast<double>(len - offset);
    if (c.model == Model::QRC && c.replay == ReplayMode::FullRestart) return valid * (valid + 1.0) / 2.0;
    return valid;
  };
  auto timed = [&](std::int64_t len) {
    ExperimentConfig probe = c;
    probe.task_path.reset();
    probe.length = len;
    const TrialSeeds seeds = trial_seeds(c, 0);
    const std::vector<double> inputs = draw_narma_inputs(len, seeds.task);
    const auto t0 = std::chrono::steady_clock::now();
    const ReservoirSpec spec = trial_reservoir(c, 0);
    const ProtocolConfig pc = protocol_config(probe, seeds);
    if (c.model == Model::QRC) qrc_run(inputs, spec, pc);
    else tdqelm_run(inputs, DelayTaps(c.taps), spec, pc);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  // Repeat the probe until enough time has elapsed for the clock to resolve it.
  // Setup cost is folded into the per-step figure, which errs on the high side.
  const std::int64_t probe_len = offset + 24;
  double elapsed = 0.0, probed_steps = 0.0;
  for (int rep = 0; rep < 200 && elapsed < 0.02; ++rep) {
    elapsed += timed(probe_len);
    probed_steps += steps(probe_len);
  }
  const double per_step = elapsed / probed_steps;
  const int workers = std::max(1, std::min(c.workers, c.ensemble_size));
  const double rounds = std::ceil(static_cast<double>(c.ensemble_size) / workers);
  return rounds * per_step * std::max(1.0, steps(m));
}

void enforce_budget(const ExperimentConfig& c, bool confirmed) {
  if (confirmed) return;
  const double est = estimate_seconds(c);
  if (est > c.max_seconds) throw BudgetRefused(est, c.max_seconds);
}

void write_state_csv(const std::filesystem::path& path, const Eigen::MatrixXd& values, std::int64_t first_t,
                     const std::vector<std::string>& column_names) {
  CsvWriter w(path);
  std::vector<std::string> header{"t"};
  header.insert(header.end(), column_names.begin(), column_names.end());
  w.row(header);
  std::vector<std::string> row(header.size());
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    row[0] = std::to_string(first_t + r);
    for (Eigen::Index k = 0; k < values.cols(); ++k) row[static_cast<std::size_t>(k) + 1] = format_double(values(r, k));
    w.row(row);
  }
}

std::vector<std::filesystem::path> write_outputs(const ExperimentResult& r) {
  const auto& c = r.config;
  std::filesystem::create_directories(c.out_dir);
  std::vector<std::filesystem::path> written;
  const json doc = to_json(r);
  const auto results = c.out_dir / (c.prefix + "_results.json");
  write_json(results, doc);
  written.push_back(results);
  for (const auto& t : r.trials) {
    if (!t.features) continue;
    const std::string stem = c.prefix + "_states_trial" + std::to_string(t.index);
    const auto csv = c.out_dir / (stem + ".csv");
    write_state_csv(csv, *t.features, t.first_t, t.column_names);
    json side;
    side["config_hash"] = doc["config_hash"];
    side["model"] = to_string(c.model);
    side["seeds"] = {{"task", t.seeds.task}, {"reservoir", t.seeds.reservoir}, {"shot", t.seeds.shot}};
    side["ledger"] = to_json(t.ledger);
    side["shape"] = {t.feature_rows, t.feature_cols};
    side["first_t"] = t.first_t;
    if (c.model != Model::LR) side["reservoir"] = to_json(trial_reservoir(c, t.index));
    const auto sidecar = c.out_dir / (stem + ".json");
    write_json(sidecar, side);
    written.push_back(csv);
    written.push_back(sidecar);
  }
  return written;
}

SweepAxis parse_sweep_axis(const std::string& tag) {
  if (tag == "input_length") return SweepAxis::InputLength;
  if (tag == "readout_dim") return SweepAxis::ReadoutDim;
  throw ValidationError("unknown sweep axis '" + tag + "' (expected input_length|readout_dim)");
}

std::string to_string(SweepAxis a) { return a == SweepAxis::InputLength ? "input_length" : "readout_dim"; }

ExperimentConfig sweep_point(const ExperimentConfig& base, SweepAxis axis, std::int64_t value) {
  ExperimentConfig c = base;
  if (axis == SweepAxis::InputLength) {
    c.task_path.reset();
    c.length = value;
  } else if (c.model == Model::LR) {
    c.lr_features = static_cast<int>(value);
  } else {
    if (value < 1 || value % c.n_sites != 0)
      throw ValidationError("readout_dim " + std::to_string(value) + " is not a positive multiple of n_sites (" +
                            std::to_string(c.n_sites) + ")");
    c.n_virtual = static_cast<int>(value / c.n_sites);
  }
  return c;
}

SweepResult run_sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::int64_t>& values,
                      bool confirmed) {
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  std::vector<ExperimentConfig> points;
  std::vector<std::string> problems;
  for (std::int64_t v : values) {
    try {
      points.push_back(sweep_point(base, axis, v));
      for (auto& p : check(points.back())) problems.push_back(to_string(axis) + "=" + std::to_string(v) + ": " + p);
    } catch (const ValidationError& ex) {
      problems.push_back(ex.what());
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  if (!confirmed) {
    double total = 0.0;
    for (const auto& p : points) total += estimate_seconds(p);
    if (total > base.max_seconds) throw BudgetRefused(total, base.max_seconds);
  }
  SweepResult s{axis, values, {}};
  for (const auto& p : points) s.points.push_back(run_experiment(p));
  return s;
}

nlohmann::json to_json(const SweepResult& s) {
  json j;
  j["schema"] = kSweepSchema;
  j["axis"] = to_string(s.axis);
  j["values"] = s.values;
  json points = json::array();
  for (const auto& p : s.points) points.push_back(to_json(p));
  j["points"] = std::move(points);
  return j;
}

namespace {

std::string condition_of(const ExperimentConfig& c) {
  if (!c.label.empty()) return c.label;
  return c.noise.enabled ? "noisy" : "noiseless";
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& s) {
  CsvWriter w(path);
  w.row({s.axis == SweepAxis::InputLength ? "M" : "N_R", "model", "condition", "trials", "evaluated", "mean_nmse",
         "std_nmse", "min_nmse", "max_nmse"});
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const auto& p = s.points[i];
    const auto& sum = p.summary;
    w.row({std::to_string(s.values[i]), to_string(p.config.model), condition_of(p.config),
           std::to_string(p.trials.size()), std::to_string(sum ? sum->n_trials : 0),
           sum ? format_double(sum->mean) : "", sum ? optional_cell(sum->std) : "",
           sum ? format_double(sum->min) : "", sum ? format_double(sum->max) : ""});
  }
}

CompareTable compare_results(const std::vector<json>& documents) {
  struct Entry {
    std::string column;
    std::int64_t length;
    std::optional<double> mean;
    std::string task_key;
  };
  std::vector<Entry> entries;
  std::vector<std::string> warnings;

  auto add_result = [&](const json& doc, const std::string& origin) {
    try {
      const ExperimentConfig c = config_from_json(doc.at("config"));
      Entry e;
      e.column = to_string(c.model) + "/" + condition_of(c);
      e.length = c.length;
      const json& summary = doc.at("summary");
      if (!summary.is_null()) e.mean = summary.at("mean").get<double>();
      e.task_key = c.task_path ? "file:" + c.task_path->string()
                               : std::to_string(c.task_seed) + "/" + to_string(c.seed_mode);
      entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw ValidationError(origin + ": malformed results document (" + ex.what() + ")");
    } catch (const ConfigError& ex) {
      throw ValidationError(origin + ": embedded config does not validate: " + ex.what());
    }
  };

  for (std::size_t i = 0; i < documents.size(); ++i) {
    const json& doc = documents[i];
    const std::string origin = "document " + std::to_string(i + 1);
    const std::string schema = doc.is_object() ? doc.value("schema", std::string()) : std::string();
    if (schema == kResultsSchema) {
      add_result(doc, origin);
    } else if (schema == kSweepSchema) {
      for (const json& p : doc.at("points")) {
        if (p.value("schema", std::string()) != kResultsSchema)
          throw ValidationError(origin + ": sweep point has an unsupported schema");
        add_result(p, origin);
      }
    } else {
      throw ValidationError(origin + ": schema mismatch (got '" + schema + "', expected " + kResultsSchema +
                            " or " + kSweepSchema + ")");
    }
  }

  CompareTable t;
  std::map<std::int64_t, std::set<std::string>> task_keys;
  std::map<std::pair<std::int64_t, std::string>, std::optional<double>> grid;
  for (const auto& e : entries) {
    if (std::find(t.columns.begin(), t.columns.end(), e.column) == t.columns.end()) t.columns.push_back(e.column);
    task_keys[e.length].insert(e.task_key);
    const auto key = std::make_pair(e.length, e.column);
    if (grid.count(key)) warnings.push_back("duplicate cell M=" + std::to_string(e.length) + " " + e.column +
                                            "; keeping the later document");
    grid[key] = e.mean;
  }
  for (const auto& [length, keys] : task_keys) {
    t.lengths.push_back(length);
    if (keys.size() > 1) {
      std::string list;
      for (const auto& k : keys) list += (list.empty() ? "" : ", ") + k;
      warnings.push_back("task seeds differ at M=" + std::to_string(length) + " (" + list + ")");
    }
  }
  for (std::int64_t length : t.lengths) {
    std::vector<std::optional<double>> row;
    for (const auto& col : t.columns) {
      auto it = grid.find({length, col});
      row.push_back(it == grid.end() ? std::nullopt : it->second);
    }
    t.cells.push_back(std::move(row));
  }
  t.warnings = std::move(warnings);
  return t;
}

void write_compare_csv(const std::filesystem::path& path, const CompareTable& t) {
  CsvWriter w(path);
  std::vector<std::string> header{"M"};
  header.insert(header.end(), t.columns.begin(), t.columns.end());
  w.row(header);
  for (std::size_t r = 0; r < t.lengths.size(); ++r) {
    std::vector<std::string> row{std::to_string(t.lengths[r])};
    for (const auto& cell : t.cells[r]) row.push_back(cell ? format_double(*cell) : "--");
    w.row(row);
  }
}

std::string render_compare(const CompareTable& t) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"M"};
  header.insert(header.end(), t.columns.begin(), t.columns.end());
  rows.push_back(header);
  for (std::size_t r = 0; r < t.lengths.size(); ++r) {
    std::vector<std::string> row{std::to_string(t.lengths[r])};
    for (const auto& cell : t.cells[r]) {
      if (!cell) {
        row.push_back("--");
        continue;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3e", *cell);
      row.push_back(buf);
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows)
    for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << "  ";
      out << std::string(width[k] - row[k].size(), ' ') << row[k];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace qres
