// qres: generate NARMA10 tasks, run reservoir experiments, sweep and compare.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid input or config,
// 3 estimated runtime above budget without --confirm-budget.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qres/experiment.hpp"
#include "qres/io.hpp"
#include "qres/tasks.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;
constexpr int kExitBudget = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out_dir;
  bool confirm_budget = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "task seed, overrides task.seed");
  cmd->add_option("--workers", f.workers, "parallel trials, overrides workers");
  cmd->add_option("--out-dir", f.out_dir, "output directory, overrides output.dir");
  cmd->add_flag("--confirm-budget", f.confirm_budget, "run even if the runtime estimate exceeds the budget");
}

json load_config_json(const CommonFlags& f) {
  if (f.config.empty()) return json::object();
  return qres::read_json(f.config);
}

qres::ExperimentConfig resolve(const json& doc, const CommonFlags& f) {
  json j = doc;
  // Flags land in the document so they go through the same validation.
  if (f.seed) j["task"]["seed"] = *f.seed;
  if (f.workers) j["workers"] = *f.workers;
  if (!f.out_dir.empty()) j["output"]["dir"] = f.out_dir;
  return qres::config_from_json(j);
}

void print_summary(const qres::ExperimentResult& r) {
  std::printf("%s", qres::to_string(r.config.model).c_str());
  if (!r.config.label.empty()) std::printf(" [%s]", r.config.label.c_str());
  std::printf("  M=%lld  trials=%zu", static_cast<long long>(r.config.length), r.trials.size());
  if (r.summary) {
    std::printf("  mean NMSE %.4e", r.summary->mean);
    if (r.summary->std) std::printf("  std %.3e", *r.summary->std);
    std::printf("  min %.4e  max %.4e", r.summary->min, r.summary->max);
  } else {
    std::printf("  (no trial could be evaluated)");
  }
  std::printf("  evolutions=%llu  %.2fs\n", static_cast<unsigned long long>(r.ledger.evolutions), r.wall_seconds);
  for (const auto& t : r.trials) {
    if (!t.skipped_reason.empty()) std::fprintf(stderr, "trial %d not evaluated: %s\n", t.index, t.skipped_reason.c_str());
    if (t.warning) std::fprintf(stderr, "trial %d: %s\n", t.index, t.warning->message().c_str());
  }
}

int cmd_task(std::int64_t length, std::uint64_t seed, const std::string& out, const std::string& out_dir) {
  fs::path path = out.empty() ? fs::path("task.csv") : fs::path(out);
  if (!out_dir.empty() && path.is_relative()) path = fs::path(out_dir) / path;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  qres::write_task_csv(path, qres::generate_narma10(length, seed));
  std::printf("%s\n", path.string().c_str());
  return 0;
}

int cmd_run(const CommonFlags& f) {
  const auto config = resolve(load_config_json(f), f);
  qres::enforce_budget(config, f.confirm_budget);
  const auto result = qres::run_experiment(config);
  print_summary(result);
  for (const auto& p : qres::write_outputs(result)) std::printf("wrote %s\n", p.string().c_str());
  return 0;
}

std::vector<std::int64_t> parse_range(const std::string& spec) {
  std::int64_t a = 0, b = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 || b < a || !in.eof())
    throw qres::ValidationError("--range expects start:stop:step with step > 0 and stop >= start");
  std::vector<std::int64_t> v;
  for (std::int64_t x = a; x <= b; x += step) v.push_back(x);
  return v;
}

int cmd_sweep(const CommonFlags& f, std::string axis, std::vector<std::int64_t> values, const std::string& range) {
  const json doc = load_config_json(f);
  json sweep_section = doc.contains("sweep") ? doc["sweep"] : json::object();
  if (axis.empty() && sweep_section.contains("axis")) axis = sweep_section["axis"].get<std::string>();
  if (!range.empty()) values = parse_range(range);
  if (values.empty() && sweep_section.contains("values")) values = sweep_section["values"].get<std::vector<std::int64_t>>();
  if (axis.empty()) throw qres::ValidationError("sweep needs --axis (input_length|readout_dim)");
  const auto base = resolve(doc, f);
  const auto sweep = qres::run_sweep(base, qres::parse_sweep_axis(axis), values, f.confirm_budget);
  for (const auto& p : sweep.points) print_summary(p);
  fs::create_directories(base.out_dir);
  const fs::path csv = base.out_dir / (base.prefix + "_sweep.csv");
  const fs::path js = base.out_dir / (base.prefix + "_sweep.json");
  qres::write_sweep_csv(csv, sweep);
  qres::write_json(js, qres::to_json(sweep));
  std::printf("wrote %s\nwrote %s\n", csv.string().c_str(), js.string().c_str());
  return 0;
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& out_dir) {
  std::vector<json> docs;
  for (const auto& p : paths) docs.push_back(qres::read_json(p));
  const auto table = qres::compare_results(docs);
  for (const auto& w : table.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("%s", qres::render_compare(table).c_str());
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path csv = fs::path(out_dir) / "compare.csv";
    qres::write_compare_csv(csv, table);
    std::printf("wrote %s\n", csv.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum reservoir experiments on the NARMA10 benchmark"};
  app.require_subcommand(1);

  auto* task = app.add_subcommand("task", "write a NARMA10 task sequence as CSV (t,s,y)");
  std::int64_t length = 0;
  std::uint64_t task_seed = 0;
  std::string task_out, task_dir;
  task->add_option("--length,-M", length, "number of timesteps")->required();
  task->add_option("--seed", task_seed, "input sequence seed");
  task->add_option("--out", task_out, "output file (default task.csv)");
  task->add_option("--out-dir", task_dir, "directory for a relative --out");

  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "train and evaluate one configuration over its trial ensemble");
  add_common(run, run_flags);

  CommonFlags sweep_flags;
  std::string axis, range;
  std::vector<std::int64_t> values;
  auto* sweep = app.add_subcommand("sweep", "repeat a run across input lengths or readout dimensions");
  add_common(sweep, sweep_flags);
  sweep->add_option("--axis", axis, "input_length or readout_dim");
  sweep->add_option("--values", values, "comma separated axis values")->delimiter(',');
  sweep->add_option("--range", range, "start:stop:step, inclusive");

  std::vector<std::string> compare_paths;
  std::string compare_dir;
  auto* compare = app.add_subcommand("compare", "join result files into a length x (model, condition) table");
  compare->add_option("paths", compare_paths, "results or sweep JSON files")->required()->check(CLI::ExistingFile);
  compare->add_option("--out-dir", compare_dir, "also write compare.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*task) return cmd_task(length, task_seed, task_out, task_dir);
    if (*run) return cmd_run(run_flags);
    if (*sweep) return cmd_sweep(sweep_flags, axis, values, range);
    if (*compare) return cmd_compare(compare_paths, compare_dir);
  } catch (const qres::BudgetRefused& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return kExitBudget;
  } catch (const qres::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failed: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
