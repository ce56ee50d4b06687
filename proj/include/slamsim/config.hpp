#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "slamsim/agent.hpp"
#include "slamsim/camera.hpp"
#include "slamsim/detection.hpp"
#include "slamsim/network.hpp"

namespace slamsim {

// Config file problem (parse error, unknown key, failed validation). The CLI
// maps this to exit code 2; every other failure is a runtime error.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RobotSetup {
  int robot_id = 0;  // >= 1; the Lander is robot 0 and configured separately
  double speed = 0.0;
  std::vector<Eigen::Vector2d> waypoints;  // arena frame, z = 0
  CameraIntrinsics camera;
  Vector3 shape_half_extents{0.4, 0.3, 0.35};
  DriftModel drift;
  LoopClosureModel loop_closure;
  double switch_threshold = 0.05;
};

// Which ordered (observer, target) pairs a detector runs for. An empty pair
// set with enabled = true means every ordered pair.
struct DetectorEnablement {
  bool enabled = true;
  std::set<std::pair<int, int>> pairs;

  bool active_for(int observer, int target) const {
    if (!enabled) return false;
    return pairs.empty() || pairs.count({observer, target}) > 0;
  }
};

struct MissionConfig {
  double arena_half_extent = 20.0;
  double dt = 0.5;
  double duration = 60.0;       // 0 permitted: log holds only the initial state
  double detection_period = 1.0;
  std::uint64_t seed = 0;

  Pose3 lander_pose;
  CameraIntrinsics lander_camera;
  Vector3 lander_shape_half_extents{0.9, 0.9, 0.6};

  DetectorModel marker_model = default_marker_model();
  DetectorModel markerless_model = default_markerless_model();
  DetectorEnablement marker_on;
  DetectorEnablement markerless_on;

  BusConfig bus;
  std::vector<RobotSetup> robots;

  std::vector<int> robot_ids() const;  // 0 plus the configured rovers, sorted

  void validate() const;  // throws ConfigError

  // Hash of everything except the seed and the detector enablement, so runs
  // that differ only in those remain paired for comparison.
  std::string fingerprint() const;
};

MissionConfig parse_mission_config(const std::string& text);   // throws ConfigError
MissionConfig load_mission_config(const std::string& path);    // throws ConfigError

}  // namespace slamsim
