#pragma once

#include <string>
#include <vector>

#include "slamsim/config.hpp"
#include "slamsim/log.hpp"
#include "slamsim/metrics.hpp"

namespace slamsim {

// Constant-speed piecewise-linear path through the waypoints, one pose per
// step, heading along the direction of travel, with a one-step turn in place
// at every heading change. Coincident consecutive waypoints are skipped.
std::vector<Pose3> generate_trajectory(const std::vector<Eigen::Vector2d>& waypoints,
                                       double speed, double dt);

// Runs the full mission loop and returns the complete log. Deterministic:
// the result is a pure function of the config, including its seed.
MissionLog run_mission(const MissionConfig& cfg);

// Recomputes the metrics from a finished log. Throws
// std::runtime_error("incomplete log") when the end record is missing.
MetricsReport replay_metrics(const MissionLog& log);

// time, robot_id, gt_x, gt_y, gt_z, est_x, est_y, est_z, err_m
void write_trajectory_csv(const MissionLog& log, const std::string& path);

std::string metrics_csv(const MetricsReport& report);

}  // namespace slamsim
