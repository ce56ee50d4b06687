#include "slamsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace slamsim {
namespace {

constexpr const char* kMetricNames[4] = {"n_detections", "max_detection_distance",
                                         "max_open_loop_duration", "trajectory_rmse"};
constexpr Direction kMetricDirections[4] = {Direction::higher_better, Direction::higher_better,
                                            Direction::lower_better, Direction::lower_better};

double metric_value(const RobotMetrics& m, int index) {
  switch (index) {
    case 0: return static_cast<double>(m.n_detections);
    case 1: return m.max_detection_distance;
    case 2: return m.max_open_loop_duration;
    default: return m.trajectory_rmse;
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

double detection_rate(long n_detected, long n_samples) {
  if (n_samples <= 0) throw std::invalid_argument("detection rate needs n_samples > 0");
  if (n_detected < 0 || n_detected > n_samples) {
    throw std::invalid_argument("detection count outside [0, n_samples]");
  }
  return static_cast<double>(n_detected) / static_cast<double>(n_samples);
}

double max_open_loop_duration(const std::vector<double>& detection_times, double t_start,
                              double t_end) {
  if (t_end < t_start) throw std::invalid_argument("t_end before t_start");
  double gap = 0.0;
  double prev = t_start;
  for (const double t : detection_times) {
    if (t < prev || t > t_end) throw std::invalid_argument("detection times unsorted or outside range");
    gap = std::max(gap, t - prev);
    prev = t;
  }
  return std::max(gap, t_end - prev);
}

double improvement_pct(double baseline, double improved) {
  if (baseline == 0.0) {
    if (improved == 0.0) return 0.0;
    throw std::invalid_argument("undefined baseline");
  }
  return 100.0 * (improved - baseline) / baseline;
}

int display_pct(double pct) {
  return static_cast<int>(std::ceil(pct - 1e-9));
}

bool favorable(double pct, Direction direction) {
  return direction == Direction::higher_better ? pct > 0.0 : pct < 0.0;
}

MetricsReport compute_metrics(const MissionLog& log) {
  const MetaRecord& meta = log.meta();
  MetricsReport report;
  report.duration = meta.duration;
  for (const int id : meta.robots) report.per_robot[id];  // materialize every robot

  std::map<int, std::vector<double>> event_times;
  std::map<int, double> err_sq_sum;
  std::map<int, long> err_n;
  for (const LogRecord& rec : log.records) {
    if (const auto* det = std::get_if<DetRecord>(&rec)) {
      if (!det->accepted) continue;
      RobotMetrics& m = report.per_robot[det->observer];
      m.n_detections += 1;
      m.max_detection_distance = std::max(m.max_detection_distance, det->distance);
      event_times[det->observer].push_back(det->t);
      event_times[det->target].push_back(det->t);
    } else if (const auto* step = std::get_if<StepRecord>(&rec)) {
      const double dx = step->gt[4] - step->est[4];
      const double dy = step->gt[5] - step->est[5];
      const double dz = step->gt[6] - step->est[6];
      err_sq_sum[step->robot] += dx * dx + dy * dy + dz * dz;
      err_n[step->robot] += 1;
    }
  }
  for (auto& [id, m] : report.per_robot) {
    m.max_open_loop_duration = max_open_loop_duration(event_times[id], 0.0, meta.duration);
    if (err_n[id] > 0) m.trajectory_rmse = std::sqrt(err_sq_sum[id] / err_n[id]);
  }
  return report;
}

double trajectory_rmse(const MissionLog& log, int robot_id) {
  double sum = 0.0;
  long n = 0;
  for (const LogRecord& rec : log.records) {
    const auto* step = std::get_if<StepRecord>(&rec);
    if (step == nullptr || step->robot != robot_id) continue;
    const double dx = step->gt[4] - step->est[4];
    const double dy = step->gt[5] - step->est[5];
    const double dz = step->gt[6] - step->est[6];
    sum += dx * dx + dy * dy + dz * dz;
    n += 1;
  }
  return n > 0 ? std::sqrt(sum / n) : 0.0;
}

std::vector<ComparisonRow> compare_missions(const MissionLog& baseline_log,
                                            const MissionLog& improved_log) {
  const MetaRecord& a = baseline_log.meta();
  const MetaRecord& b = improved_log.meta();
  if (a.fingerprint != b.fingerprint || a.seed != b.seed || a.robots != b.robots) {
    throw std::invalid_argument("configs not paired");
  }
  const MetricsReport base = compute_metrics(baseline_log);
  const MetricsReport better = compute_metrics(improved_log);

  std::vector<ComparisonRow> rows;
  for (const int id : a.robots) {
    for (int k = 0; k < 4; ++k) {
      ComparisonRow row;
      row.robot = id;
      row.metric = kMetricNames[k];
      row.direction = kMetricDirections[k];
      row.baseline = metric_value(base.per_robot.at(id), k);
      row.improved = metric_value(better.per_robot.at(id), k);
      if (row.baseline != 0.0 || row.improved == 0.0) {
        row.pct = improvement_pct(row.baseline, row.improved);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "robot,metric,baseline,improved,improvement_pct,display_pct,favorable\n";
  for (const ComparisonRow& row : rows) {
    out += std::to_string(row.robot) + "," + row.metric + "," + fmt(row.baseline) + "," +
           fmt(row.improved) + ",";
    if (row.pct) {
      out += fmt(*row.pct) + "," + std::to_string(display_pct(*row.pct)) + "," +
             (favorable(*row.pct, row.direction) ? "yes" : "no");
    } else {
      out += "undefined,,";
    }
    out += "\n";
  }
  return out;
}

std::string comparison_table(const std::vector<ComparisonRow>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-6s %-24s %12s %12s %12s\n", "robot", "metric",
                "marker-only", "with-mkless", "improvement");
  out += line;
  for (const ComparisonRow& row : rows) {
    std::string pct = "n/a";
    if (row.pct) {
      char p[24];
      std::snprintf(p, sizeof p, "%+d%%", display_pct(*row.pct));
      pct = p;
    }
    std::snprintf(line, sizeof line, "%-6d %-24s %12s %12s %12s\n", row.robot,
                  row.metric.c_str(), fmt(row.baseline).c_str(), fmt(row.improved).c_str(),
                  pct.c_str());
    out += line;
  }
  return out;
}

std::vector<SweepStats> aggregate_comparisons(
    const std::vector<std::vector<ComparisonRow>>& per_seed) {
  if (per_seed.empty()) throw std::invalid_argument("aggregate needs at least one comparison");
  std::vector<SweepStats> stats;
  for (int k = 0; k < 4; ++k) {
    SweepStats s;
    s.metric = kMetricNames[k];
    s.direction = kMetricDirections[k];
    std::vector<double> pcts;
    int wins = 0;
    for (const auto& rows : per_seed) {
      for (const ComparisonRow& row : rows) {
        if (row.metric != s.metric) continue;
        s.mean_baseline += row.baseline;
        s.mean_improved += row.improved;
        s.n_rows += 1;
        if (row.pct) {
          pcts.push_back(*row.pct);
          if (favorable(*row.pct, row.direction)) ++wins;
        }
      }
    }
    if (s.n_rows > 0) {
      s.mean_baseline /= s.n_rows;
      s.mean_improved /= s.n_rows;
      s.win_rate = static_cast<double>(wins) / s.n_rows;
    }
    if (!pcts.empty()) {
      double mean = 0.0;
      for (const double p : pcts) mean += p;
      mean /= static_cast<double>(pcts.size());
      double var = 0.0;
      for (const double p : pcts) var += (p - mean) * (p - mean);
      s.mean_pct = mean;
      s.std_pct = std::sqrt(var / static_cast<double>(pcts.size()));
    }
    stats.push_back(s);
  }
  return stats;
}

std::string sweep_csv(const std::vector<SweepStats>& stats) {
  std::string out = "metric,n_rows,mean_baseline,mean_improved,mean_pct,std_pct,win_rate\n";
  for (const SweepStats& s : stats) {
    out += s.metric + "," + std::to_string(s.n_rows) + "," + fmt(s.mean_baseline) + "," +
           fmt(s.mean_improved) + "," + fmt(s.mean_pct) + "," + fmt(s.std_pct) + "," +
           fmt(s.win_rate) + "\n";
  }
  return out;
}

}  // namespace slamsim
