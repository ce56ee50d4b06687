#include "slamsim/agent.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace slamsim {

namespace {

constexpr double kCovarianceFloor = 1e-6;  // reset value on each frame switch

std::pair<NodeId, NodeId> ordered_pair(NodeId x, NodeId y) {
  return x < y ? std::make_pair(x, y) : std::make_pair(y, x);
}

}  // namespace

void DriftModel::validate() const {
  if (trans_std_per_sqrt_m < 0.0 || rot_std_per_sqrt_rad < 0.0) {
    throw std::invalid_argument("drift: noise stds must be non-negative");
  }
  const Matrix6 sym = 0.5 * (covariance_growth + covariance_growth.transpose());
  if ((covariance_growth - sym).cwiseAbs().maxCoeff() > 1e-12 ||
      Eigen::SelfAdjointEigenSolver<Matrix6>(sym).eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument("drift: covariance growth must be symmetric PSD");
  }
}

void LoopClosureModel::validate() const {
  if (recall < 0.0 || recall > 1.0) throw std::invalid_argument("loop closure: recall outside [0,1]");
  if (revisit_radius < 0.0) throw std::invalid_argument("loop closure: negative revisit radius");
  if (trans_std <= 0.0 || rot_std <= 0.0) {
    throw std::invalid_argument("loop closure: measurement stds must be positive");
  }
}

Agent::Agent(int robot_id, const Pose3& start_pose, DriftModel drift, LoopClosureModel loop_model,
             double switch_threshold)
    : drift_(std::move(drift)), loop_model_(std::move(loop_model)), switch_threshold_(switch_threshold) {
  drift_.validate();
  loop_model_.validate();
  if (switch_threshold_ <= 0.0) throw std::invalid_argument("frame switch threshold must be positive");
  state_.robot_id = robot_id;
  state_.gt_pose = start_pose;
  state_.est_pose = start_pose;
  state_.covariance = kCovarianceFloor * Matrix6::Identity();
  state_.current_node = NodeId{robot_id, 0};
  gt_node_pose_ = start_pose;
  node_history_.emplace_back(state_.current_node, start_pose);
}

GraphDelta Agent::make_delta(std::vector<NodeAnnounce> nodes, std::vector<Factor> factors) {
  GraphDelta d;
  d.origin = state_.robot_id;
  d.seq = next_seq_++;
  d.emit_time = state_.time;
  d.nodes = std::move(nodes);
  d.factors = std::move(factors);
  return d;
}

GraphDelta Agent::initial_delta() {
  std::vector<Factor> factors;
  if (state_.robot_id == 0) {
    // The Lander's pose defines the global frame; the pinning prior fixes the
    // gauge for every component connected to it.
    Factor anchor;
    anchor.kind = FactorKind::prior_anchor;
    anchor.a = state_.current_node;
    anchor.measurement = state_.gt_pose;
    anchor.information = InformationMatrix::identity(1e9);
    anchor.time = state_.time;
    factors.push_back(anchor);
  }
  return make_delta({NodeAnnounce{state_.current_node, state_.est_pose}}, std::move(factors));
}

void Agent::propagate(const Pose3& gt_motion, Rng& rng) {
  const double dist = translation_norm(gt_motion);
  const double angle = rotation_angle(gt_motion);
  const double rot_std = drift_.rot_std_per_sqrt_rad * std::sqrt(angle);
  const double trans_std = drift_.trans_std_per_sqrt_m * std::sqrt(dist);
  // Fixed draw order and count per call, so outcome streams stay aligned
  // across configurations that share a seed.
  Twist noise;
  for (int i = 0; i < 3; ++i) noise.rotvec[i] = rng.normal(0.0, rot_std);
  for (int i = 0; i < 3; ++i) noise.transvec[i] = rng.normal(0.0, trans_std);

  state_.gt_pose = compose(state_.gt_pose, gt_motion);
  const Pose3 est_motion = compose(gt_motion, exp(noise));
  state_.est_pose = compose(state_.est_pose, est_motion);
  local_offset_ = compose(local_offset_, est_motion);
  state_.covariance += drift_.covariance_growth * dist;
}

std::optional<GraphDelta> Agent::maybe_frame_switch() {
  if (state_.covariance.trace() <= switch_threshold_) return std::nullopt;
  const NodeId new_node{state_.robot_id, state_.current_node.submap_index + 1};

  Factor f;
  f.kind = FactorKind::frame_switch;
  f.a = state_.current_node;
  f.b = new_node;
  f.measurement = local_offset_;
  f.information = InformationMatrix(state_.covariance.inverse());
  f.time = state_.time;

  state_.current_node = new_node;
  state_.covariance = kCovarianceFloor * Matrix6::Identity();
  local_offset_ = Pose3::identity();
  gt_node_pose_ = state_.gt_pose;
  node_history_.emplace_back(new_node, state_.gt_pose);

  return make_delta({NodeAnnounce{new_node, state_.est_pose}}, {f});
}

std::optional<GraphDelta> Agent::maybe_loop_closure(Rng& rng) {
  const Vector3 here = state_.gt_pose.translation;
  const std::pair<NodeId, Pose3>* match = nullptr;
  for (const auto& entry : node_history_) {
    if (entry.first == state_.current_node) continue;
    if (closed_pairs_.count(ordered_pair(entry.first, state_.current_node))) continue;
    if ((entry.second.translation - here).norm() <= loop_model_.revisit_radius) {
      match = &entry;
      break;  // earliest qualifying node
    }
  }
  if (match == nullptr) return std::nullopt;
  if (!rng.bernoulli(loop_model_.recall)) return std::nullopt;  // retried next call

  Factor f;
  f.kind = FactorKind::loop_closure;
  f.a = state_.current_node;
  f.b = match->first;
  f.information = InformationMatrix::from_stddevs(loop_model_.rot_std, loop_model_.trans_std);
  const Twist noise = sample_twist_noise(f.information, rng);
  f.measurement = compose(between(gt_node_pose_, match->second), exp(noise));
  f.time = state_.time;

  closed_pairs_.insert(ordered_pair(f.a, *f.b));
  return make_delta({}, {f});
}

GraphDelta Agent::ingest_detection(const DetectionConstraint& c, const DetectionExchange& exchange) {
  if (c.observer_id != state_.robot_id) throw std::invalid_argument("detection observer mismatch");
  if (c.target_id == state_.robot_id) throw std::invalid_argument("self-detection rejected");

  // Body-frame measurement lifted to node frames through both robots'
  // estimated offsets from their current nodes.
  Factor f;
  f.kind = FactorKind::robot_detection;
  f.a = state_.current_node;
  f.b = exchange.target_node;
  f.measurement =
      compose(local_offset_, compose(c.measured_relative_pose, inverse(exchange.target_local_offset)));
  f.information = c.information;
  f.time = c.time;
  return make_delta({}, {f});
}

Pose3 Agent::slam_estimate() const {
  if (graph_.has_node(state_.current_node)) {
    return compose(graph_.estimate(state_.current_node), local_offset_);
  }
  return state_.est_pose;
}

}  // namespace slamsim
