#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slamsim/config.hpp"
#include "slamsim/log.hpp"
#include "slamsim/metrics.hpp"
#include "slamsim/sim.hpp"

namespace fs = std::filesystem;
using namespace slamsim;

namespace {

// SLAMSIM_LOG_LEVEL: quiet | info (default) | debug
int verbosity() {
  const char* env = std::getenv("SLAMSIM_LOG_LEVEL");
  if (env == nullptr) return 1;
  const std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void info(const std::string& msg) {
  if (verbosity() >= 1) std::cerr << msg << "\n";
}

void debug(const std::string& msg) {
  if (verbosity() >= 2) std::cerr << msg << "\n";
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void refuse_overwrite(const fs::path& log_path, bool force) {
  if (!force && fs::exists(log_path)) {
    throw std::runtime_error("refusing to overwrite " + log_path.string() +
                             " (pass --force to replace it)");
  }
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool force = false;
  std::string detectors;  // "", "marker", "markerless", "both"
};

MissionConfig load_with_overrides(const CommonOpts& opts) {
  MissionConfig cfg = load_mission_config(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (opts.detectors == "marker") {
    cfg.marker_on.enabled = true;
    cfg.markerless_on.enabled = false;
  } else if (opts.detectors == "markerless") {
    cfg.marker_on.enabled = false;
    cfg.markerless_on.enabled = true;
  } else if (opts.detectors == "both") {
    cfg.marker_on.enabled = true;
    cfg.markerless_on.enabled = true;
  }
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_detectors) {
  cmd->add_option("--config", opts.config_path, "Mission config JSON")->required();
  cmd->add_option("--out", opts.out_dir, "Output directory (created if absent)");
  cmd->add_option("--seed", opts.seed, "Override the config seed")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_flag("--force", opts.force, "Overwrite existing logs");
  if (with_detectors) {
    cmd->add_option("--detectors", opts.detectors, "Detector enablement override")
        ->check(CLI::IsMember({"marker", "markerless", "both"}));
  }
}

int cmd_run(const CommonOpts& opts) {
  const MissionConfig cfg = load_with_overrides(opts);
  fs::create_directories(opts.out_dir);
  const fs::path log_path = fs::path(opts.out_dir) / "mission.ndjson";
  refuse_overwrite(log_path, opts.force);

  info("running mission: seed " + std::to_string(cfg.seed));
  const MissionLog log = run_mission(cfg);
  write_mission_log(log, log_path.string());
  write_trajectory_csv(log, (fs::path(opts.out_dir) / "trajectory.csv").string());
  const MetricsReport report = replay_metrics(log);
  write_text(fs::path(opts.out_dir) / "metrics.csv", metrics_csv(report));
  std::cout << metrics_csv(report);
  info("wrote " + log_path.string());
  return 0;
}

// One seed of the tag-only vs tag+markerless pairing. Reuses logs already on
// disk when `resume` is set, which makes interrupted sweeps idempotent.
std::vector<ComparisonRow> paired_runs(const MissionConfig& cfg, const fs::path& dir, bool force,
                                       bool resume) {
  fs::create_directories(dir);
  const fs::path tag_path = dir / "tag.ndjson";
  const fs::path both_path = dir / "both.ndjson";

  MissionConfig tag_cfg = cfg;
  tag_cfg.markerless_on.enabled = false;

  MissionLog tag_log;
  MissionLog both_log;
  if (resume && fs::exists(tag_path) && fs::exists(both_path)) {
    debug("reusing " + tag_path.string() + " and " + both_path.string());
    tag_log = read_mission_log(tag_path.string());
    both_log = read_mission_log(both_path.string());
  } else {
    refuse_overwrite(tag_path, force);
    refuse_overwrite(both_path, force);
    tag_log = run_mission(tag_cfg);
    both_log = run_mission(cfg);
    write_mission_log(tag_log, tag_path.string());
    write_mission_log(both_log, both_path.string());
  }

  const std::vector<ComparisonRow> rows = compare_missions(tag_log, both_log);
  write_text(dir / "compare.csv", comparison_csv(rows));
  return rows;
}

int cmd_compare(const CommonOpts& opts) {
  const MissionConfig cfg = load_with_overrides(opts);
  if (!cfg.markerless_on.enabled) throw ConfigError("nothing to compare: markerless detector disabled");

  info("comparing tag-only vs tag+markerless: seed " + std::to_string(cfg.seed));
  const std::vector<ComparisonRow> rows = paired_runs(cfg, opts.out_dir, opts.force, false);
  const std::string table = comparison_table(rows);
  write_text(fs::path(opts.out_dir) / "compare.txt", table);
  std::cout << table;
  return 0;
}

int cmd_sweep(const CommonOpts& opts, int n_seeds) {
  const MissionConfig base = load_with_overrides(opts);
  if (!base.markerless_on.enabled) throw ConfigError("nothing to compare: markerless detector disabled");

  std::vector<std::vector<ComparisonRow>> per_seed;
  for (int s = 0; s < n_seeds; ++s) {
    MissionConfig cfg = base;
    cfg.seed = static_cast<std::uint64_t>(s);
    const fs::path dir = fs::path(opts.out_dir) / ("seed_" + std::to_string(s));
    info("sweep seed " + std::to_string(s));
    per_seed.push_back(paired_runs(cfg, dir, opts.force, true));
  }

  const std::vector<SweepStats> stats = aggregate_comparisons(per_seed);
  const std::string csv = sweep_csv(stats);
  write_text(fs::path(opts.out_dir) / "aggregate.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_replay(const std::string& log_path, const std::string& traj_csv) {
  const MissionLog log = read_mission_log(log_path);
  const MetricsReport report = replay_metrics(log);
  if (!traj_csv.empty()) write_trajectory_csv(log, traj_csv);
  std::cout << metrics_csv(report);
  return 0;
}

int cmd_validate(const std::string& config_path) {
  const MissionConfig cfg = load_mission_config(config_path);
  std::cout << "ok: fingerprint " << cfg.fingerprint() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot SLAM mission simulator"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run = app.add_subcommand("run", "Run one mission and write its log and reports");
  add_common(run, run_opts, true);

  CommonOpts cmp_opts;
  CLI::App* compare =
      app.add_subcommand("compare", "Run tag-only and tag+markerless with one seed, emit the paired table");
  add_common(compare, cmp_opts, false);

  CommonOpts sweep_opts;
  int n_seeds = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "Paired comparison over seeds 0..N-1 with aggregate stats");
  add_common(sweep, sweep_opts, false);
  sweep->add_option("--seeds", n_seeds, "Number of seeds")->required()->check(CLI::PositiveNumber);

  std::string replay_log;
  std::string replay_traj;
  CLI::App* replay = app.add_subcommand("replay", "Recompute metrics from an existing log");
  replay->add_option("log", replay_log, "Mission log (.ndjson or .ndjson.gz)")->required();
  replay->add_option("--traj-csv", replay_traj, "Also write the trajectory CSV here");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate-config", "Parse and validate a config, print its fingerprint");
  validate->add_option("--config", validate_path, "Mission config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (compare->parsed()) return cmd_compare(cmp_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, n_seeds);
    if (replay->parsed()) return cmd_replay(replay_log, replay_traj);
    if (validate->parsed()) return cmd_validate(validate_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
