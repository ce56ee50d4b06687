#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slamsim/detection.hpp"
#include "slamsim/graph.hpp"

namespace slamsim {

// Newline-delimited JSON mission trace: one record per event, in emission
// order (meta first, end last). Serialization is deterministic, so identical
// missions produce byte-identical files.

struct MetaRecord {
  std::uint64_t seed = 0;
  std::string fingerprint;        // config hash, excludes seed and enablement
  bool marker_enabled = true;
  bool markerless_enabled = true;
  double dt = 0.0;
  double duration = 0.0;
  std::vector<int> robots;
};

// Per robot per step: ground truth and the composed SLAM estimate (graph
// estimate of the current node, carried forward by the local offset).
struct StepRecord {
  double t = 0.0;
  int robot = 0;
  std::array<double, 7> gt{};
  std::array<double, 7> est{};
  NodeId node;
};

// One detector attempt, accepted or not. Markerless attempts that produced a
// bounding box also carry it, so filter invariants are checkable from the log.
struct DetRecord {
  double t = 0.0;
  int observer = 0;
  int target = 0;
  DetectorKind model = DetectorKind::marker;
  bool accepted = false;
  std::string reason;            // miss reason; "superseded" when the marker won
  double distance = 0.0;         // ground truth at attempt time
  std::optional<double> confidence;
  std::optional<std::array<double, 4>> bbox;  // clamped, [xmin, ymin, xmax, ymax]
  std::optional<int> borders;
  std::optional<std::array<double, 7>> measured;
};

struct SwitchRecord {
  double t = 0.0;
  int robot = 0;
  NodeId node;  // newly created
};

struct LoopRecord {
  double t = 0.0;
  int robot = 0;
  NodeId a;
  NodeId b;
};

struct MsgRecord {
  double t = 0.0;       // delivery time
  double emit_time = 0.0;
  int origin = 0;
  std::uint64_t seq = 0;
  int receiver = 0;
};

struct OptFailRecord {
  double t = 0.0;
  int robot = 0;
  std::string error;
};

struct FinalOptRecord {
  int robot = 0;
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  int n_optimized_nodes = 0;
  int n_skipped_nodes = 0;
};

struct ConsistencyRecord {
  bool consistent = false;
  std::vector<std::pair<int, std::string>> digests;  // (robot, hex)
};

// Terminates a complete log and snapshots the online metrics.
struct EndRecord {
  struct RobotSummary {
    int robot = 0;
    int n_detections = 0;
    double max_detection_distance = 0.0;
    double max_open_loop_duration = 0.0;
    double trajectory_rmse = 0.0;
  };
  double t = 0.0;
  std::vector<RobotSummary> per_robot;
};

using LogRecord = std::variant<MetaRecord, StepRecord, DetRecord, SwitchRecord, LoopRecord,
                               MsgRecord, OptFailRecord, FinalOptRecord, ConsistencyRecord,
                               EndRecord>;

struct MissionLog {
  std::vector<LogRecord> records;

  const MetaRecord& meta() const;  // throws std::runtime_error if absent
  bool complete() const;           // last record is an EndRecord
  const EndRecord& end() const;    // throws std::runtime_error if incomplete
};

std::string to_ndjson(const MissionLog& log);
MissionLog parse_ndjson(const std::string& text);  // throws std::runtime_error

// Paths ending in .gz are gzip-compressed with a fixed header, keeping equal
// logs byte-identical.
void write_mission_log(const MissionLog& log, const std::string& path);
MissionLog read_mission_log(const std::string& path);

std::string gzip_compress(const std::string& bytes);
std::string gzip_decompress(const std::string& bytes);

}  // namespace slamsim
