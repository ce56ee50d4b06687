#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "slamsim/detection.hpp"
#include "slamsim/geometry.hpp"
#include "slamsim/graph.hpp"
#include "slamsim/rng.hpp"

namespace slamsim {

// Dead-reckoning drift: noise stds scale with the square root of per-step
// motion so variances accumulate linearly with distance/angle traveled.
struct DriftModel {
  double trans_std_per_sqrt_m = 0.0;   // m / sqrt(m)
  double rot_std_per_sqrt_rad = 0.0;   // rad / sqrt(rad)
  Matrix6 covariance_growth = Matrix6::Zero();  // PSD increment per meter

  void validate() const;
};

struct LoopClosureModel {
  double recall = 0.0;        // per qualifying revisit, per attempt
  double revisit_radius = 0.0;
  double trans_std = 0.01;
  double rot_std = 0.005;

  void validate() const;
};

// Snapshot handed to the detection models and the logger.
struct AgentState {
  int robot_id = 0;
  double time = 0.0;
  Pose3 gt_pose;
  Pose3 est_pose;  // dead-reckoned world estimate (drifts until corrected)
  Matrix6 covariance = Matrix6::Zero();
  NodeId current_node;
};

// Posted alongside a DetectionConstraint so the observer can tie the
// body-frame measurement to the target's graph: the target's current node and
// its estimated offset from that node at detection time.
struct DetectionExchange {
  NodeId target_node;
  Pose3 target_local_offset;
};

// One robot: drifting local estimator, covariance-triggered submap creation,
// stochastic intra-robot loop closures, detection ingestion, and a full
// replica of the shared pose graph.
class Agent {
 public:
  Agent(int robot_id, const Pose3& start_pose, DriftModel drift, LoopClosureModel loop_model,
        double switch_threshold);

  // Root-node announcement (plus the anchor prior when this robot is the
  // Lander, robot 0). Applied locally by the caller via deliver().
  GraphDelta initial_delta();

  void set_time(double t) { state_.time = t; }

  // gt ← gt∘motion; local estimate ← estimate∘motion∘exp(noise); covariance
  // grows with ground-truth distance traveled.
  void propagate(const Pose3& gt_motion, Rng& rng);

  // When trace(covariance) exceeds the threshold: new submap node measured by
  // the accumulated local offset, weighted by the accumulated covariance.
  std::optional<GraphDelta> maybe_frame_switch();

  // At most one closure per call: earliest previously created node whose
  // ground-truth position lies within the revisit radius of the current
  // ground-truth position, gated by one Bernoulli(recall) trial. Closed pairs
  // never re-fire.
  std::optional<GraphDelta> maybe_loop_closure(Rng& rng);

  // Lifts a body-frame detection into a node-to-node factor using this
  // agent's and the target's estimated offsets from their current nodes.
  GraphDelta ingest_detection(const DetectionConstraint& c, const DetectionExchange& exchange);

  void deliver(const GraphDelta& delta) { graph_.apply_delta(delta); }
  OptReport optimize(const OptOptions& opts = {}) { return graph_.optimize(opts); }

  const AgentState& state() const { return state_; }
  const PoseGraph& graph() const { return graph_; }
  PoseGraph& graph() { return graph_; }
  const Pose3& local_offset() const { return local_offset_; }
  double switch_threshold() const { return switch_threshold_; }
  const std::vector<std::pair<NodeId, Pose3>>& node_history() const { return node_history_; }

  // Best current world-frame pose estimate: the graph's (possibly optimized)
  // estimate of the current node composed with the local dead-reckoned
  // offset. Falls back to the drifting est_pose if the node is unknown.
  Pose3 slam_estimate() const;

 private:
  GraphDelta make_delta(std::vector<NodeAnnounce> nodes, std::vector<Factor> factors);

  AgentState state_;
  Pose3 local_offset_;        // estimated motion since current node creation
  Pose3 gt_node_pose_;        // ground truth at current node creation
  DriftModel drift_;
  LoopClosureModel loop_model_;
  double switch_threshold_;
  PoseGraph graph_;
  std::vector<std::pair<NodeId, Pose3>> node_history_;  // (node, gt at creation)
  std::set<std::pair<NodeId, NodeId>> closed_pairs_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace slamsim
