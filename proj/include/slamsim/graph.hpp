#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slamsim/geometry.hpp"

namespace slamsim {

// Graph node identity: (robot, submap index). The Lander is robot 0 and its
// anchor node is (0, 0).
struct NodeId {
  int robot_id = 0;
  int submap_index = 0;

  auto operator<=>(const NodeId&) const = default;
};

enum class FactorKind { prior_anchor, frame_switch, loop_closure, robot_detection };

const char* to_string(FactorKind kind);

// One measurement constraint. Priors use only endpoint `a`; binary factors
// constrain between(a, b) toward the measurement.
struct Factor {
  FactorKind kind = FactorKind::frame_switch;
  NodeId a;
  std::optional<NodeId> b;
  Pose3 measurement;
  InformationMatrix information = InformationMatrix::identity();
  double time = 0.0;

  bool is_binary() const { return b.has_value(); }
  void validate() const;
};

// New-node announcement inside a delta. The hint seeds nodes that no factor in
// the delta can dead-reckon from (a robot's root node).
struct NodeAnnounce {
  NodeId id;
  Pose3 estimate_hint;
};

// Unit of decentralized replication: everything one event added to the
// origin's graph. (origin, seq) identifies a delta for deduplication.
struct GraphDelta {
  int origin = 0;
  std::uint64_t seq = 0;
  double emit_time = 0.0;
  std::vector<NodeAnnounce> nodes;
  std::vector<Factor> factors;
};

struct OptOptions {
  int max_iters = 50;
  double cost_tol = 1e-12;   // relative cost decrease per accepted step
  double step_tol = 1e-10;   // max-norm of the accepted update
  double lambda_init = 1e-6;
};

struct OptReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  int n_optimized_nodes = 0;
  std::vector<NodeId> skipped_nodes;  // nodes in components with no anchor
  bool from_cache = false;
};

// Residual of one factor at the given estimates, in twist coordinates:
// log(measurement⁻¹ ∘ between(est_a, est_b)), or log(measurement⁻¹ ∘ est_a)
// for priors. Throws on a missing endpoint ("dangling factor").
Twist residual(const Factor& f, const std::map<NodeId, Pose3>& estimates);

// Residual plus analytic Jacobians w.r.t. right-multiplicative twist
// perturbations of each endpoint. jac_b is meaningless for priors.
struct ResidualJacobians {
  Twist r;
  Matrix6 jac_a;
  Matrix6 jac_b;
};
ResidualJacobians residual_jacobians(const Factor& f, const std::map<NodeId, Pose3>& estimates);

// se(3) adjoint machinery, exposed for verification against finite
// differences and series oracles.
Matrix6 se3_adjoint(const Pose3& p);                 // Ad(T)
Matrix6 se3_ad(const Twist& xi);                     // ad(ξ)
Matrix6 se3_right_jacobian_inverse(const Twist& xi); // Jr(ξ)⁻¹

class PoseGraph {
 public:
  // Local construction (the owning robot's own events).
  void add_node(NodeId id, const Pose3& initial_estimate);
  void add_factor(const Factor& f);

  bool has_node(NodeId id) const { return estimates_.count(id) > 0; }
  const Pose3& estimate(NodeId id) const;
  const std::map<NodeId, Pose3>& nodes() const { return estimates_; }
  const std::vector<Factor>& factors() const { return factors_; }

  // Robust cost Σ ρ(rᵀΛr): quadratic for prior/frame_switch, Huber (k = 1 on
  // the whitened norm) for loop_closure and robot_detection.
  double total_cost() const;

  // Levenberg-Marquardt over right-multiplicative twist updates. Nodes under
  // a prior with information ≥ 1e9 on every diagonal are held fixed at the
  // prior measurement; components not reachable from any prior are skipped
  // and listed in the report. Throws "optimization failed" if the damped
  // normal equations stay singular at maximum damping.
  OptReport optimize(const OptOptions& opts = {});

  // Idempotent, order-tolerant replication. Deltas whose factors reference
  // nodes this replica has not seen are buffered and retried after each
  // successful application.
  void apply_delta(const GraphDelta& delta);
  std::size_t pending_count() const { return pending_.size(); }

  // Structural hash over sorted node ids and factors; estimates excluded so
  // replicas agree as soon as structure converges.
  std::uint64_t digest() const;

  // Line-oriented text dump (NODE / FACTOR records), canonically ordered so
  // converged replicas diff clean.
  std::string dump() const;

  std::uint64_t structure_version() const { return structure_version_; }

 private:
  bool delta_applicable(const GraphDelta& delta) const;
  void apply_now(const GraphDelta& delta);

  std::map<NodeId, Pose3> estimates_;
  std::vector<Factor> factors_;            // kept sorted by canonical key
  std::vector<std::string> factor_keys_;   // parallel to factors_
  std::set<std::pair<int, std::uint64_t>> seen_deltas_;
  std::vector<GraphDelta> pending_;
  std::uint64_t structure_version_ = 0;
  std::uint64_t optimized_version_ = ~0ULL;
  OptReport cached_report_;
};

}  // namespace slamsim
