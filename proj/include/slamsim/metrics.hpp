#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slamsim/log.hpp"

namespace slamsim {

enum class Direction { higher_better, lower_better };

// n_detected / n_samples; throws std::invalid_argument on n_samples <= 0 or
// counts outside [0, n_samples].
double detection_rate(long n_detected, long n_samples);

// Largest gap in (t_start, d1, ..., dn, t_end). `detection_times` must be
// sorted and within [t_start, t_end].
double max_open_loop_duration(const std::vector<double>& detection_times, double t_start,
                              double t_end);

// Relative change in percent, 100 * (improved - baseline) / baseline. Two
// zeros compare as 0; otherwise a zero baseline throws std::invalid_argument
// ("undefined baseline").
double improvement_pct(double baseline, double improved);

// Integer percent for display: ceiling with an epsilon guard, which
// reproduces the reference table's rounding on its boundary rows.
int display_pct(double pct);

bool favorable(double pct, Direction direction);

struct RobotMetrics {
  int n_detections = 0;                 // as observer
  double max_detection_distance = 0.0;  // ground-truth range, as observer; 0 if none
  double max_open_loop_duration = 0.0;  // observer or target role closes a gap
  double trajectory_rmse = 0.0;
};

struct MetricsReport {
  double duration = 0.0;
  std::map<int, RobotMetrics> per_robot;
};

// Pure function of the log records; usable online (before the end record).
MetricsReport compute_metrics(const MissionLog& log);

double trajectory_rmse(const MissionLog& log, int robot_id);

struct ComparisonRow {
  int robot = 0;
  std::string metric;
  Direction direction = Direction::higher_better;
  double baseline = 0.0;
  double improved = 0.0;
  std::optional<double> pct;  // absent when the baseline is 0 and values differ
};

// Paired comparison of a marker-only run against a run with markerless
// enabled. Throws std::invalid_argument("configs not paired") unless both
// logs share a config fingerprint and master seed.
std::vector<ComparisonRow> compare_missions(const MissionLog& baseline_log,
                                            const MissionLog& improved_log);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::string comparison_table(const std::vector<ComparisonRow>& rows);

struct SweepStats {
  std::string metric;
  Direction direction = Direction::higher_better;
  double mean_baseline = 0.0;
  double mean_improved = 0.0;
  double mean_pct = 0.0;   // over rows with a defined pct
  double std_pct = 0.0;
  double win_rate = 0.0;   // favorable fraction of (seed, robot) rows
  int n_rows = 0;
};

std::vector<SweepStats> aggregate_comparisons(
    const std::vector<std::vector<ComparisonRow>>& per_seed);

std::string sweep_csv(const std::vector<SweepStats>& stats);

}  // namespace slamsim
