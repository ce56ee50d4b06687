#include "slamsim/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "slamsim/rng.hpp"

namespace slamsim {

namespace {

constexpr double kHuberK = 1.0;          // threshold on the whitened residual norm
constexpr double kFixedPriorInfo = 1e9;  // prior info at/above this pins the node
constexpr double kLambdaMax = 1e12;

bool is_robust(FactorKind kind) {
  return kind == FactorKind::loop_closure || kind == FactorKind::robot_detection;
}

// e = r^T Λ r. Huber transitions to linear growth at whitened norm kHuberK.
double robust_cost(FactorKind kind, double e) {
  if (!is_robust(kind) || e <= kHuberK * kHuberK) return e;
  return 2.0 * kHuberK * std::sqrt(e) - kHuberK * kHuberK;
}

double robust_weight(FactorKind kind, double e) {
  if (!is_robust(kind) || e <= kHuberK * kHuberK) return 1.0;
  return kHuberK / std::sqrt(e);
}

void append_i64(std::string& out, std::int64_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

void append_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  out.append(reinterpret_cast<const char*>(&bits), sizeof bits);
}

// Canonical binary encoding; doubles as the sort key that keeps factors_ in a
// replica-independent order regardless of delivery order.
std::string factor_key(const Factor& f) {
  std::string key;
  key.reserve(144);
  append_i64(key, static_cast<std::int64_t>(f.kind));
  append_i64(key, f.a.robot_id);
  append_i64(key, f.a.submap_index);
  append_i64(key, f.b ? 1 : 0);
  append_i64(key, f.b ? f.b->robot_id : 0);
  append_i64(key, f.b ? f.b->submap_index : 0);
  append_f64(key, f.time);
  for (const double v : f.measurement.to_array()) append_f64(key, v);
  const Matrix6& info = f.information.matrix();
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) append_f64(key, info(i, j));
  return key;
}

struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }

  int find(int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(int i, int j) { parent[find(i)] = find(j); }
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double cost_of(const std::vector<Factor>& factors, const std::map<NodeId, Pose3>& estimates) {
  double total = 0.0;
  for (const Factor& f : factors) {
    const Vector6 rv = residual(f, estimates).vector();
    const double e = rv.dot(f.information.matrix() * rv);
    total += robust_cost(f.kind, e);
  }
  return total;
}

}  // namespace

const char* to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::prior_anchor: return "prior_anchor";
    case FactorKind::frame_switch: return "frame_switch";
    case FactorKind::loop_closure: return "loop_closure";
    case FactorKind::robot_detection: return "robot_detection";
  }
  return "unknown";
}

void Factor::validate() const {
  if (kind == FactorKind::prior_anchor) {
    if (b) throw std::invalid_argument("prior factor takes a single endpoint");
    return;
  }
  if (!b) throw std::invalid_argument("binary factor missing second endpoint");
  if (kind == FactorKind::robot_detection && a.robot_id == b->robot_id) {
    throw std::invalid_argument("robot_detection endpoints must belong to different robots");
  }
  if (kind == FactorKind::frame_switch &&
      (a.robot_id != b->robot_id || b->submap_index != a.submap_index + 1)) {
    throw std::invalid_argument("frame_switch endpoints must be consecutive submaps of one robot");
  }
  if (kind == FactorKind::loop_closure && a == *b) {
    throw std::invalid_argument("loop_closure endpoints must differ");
  }
}

Matrix6 se3_ad(const Twist& xi) {
  Matrix6 m = Matrix6::Zero();
  const Matrix3 wx = skew(xi.rotvec);
  m.topLeftCorner<3, 3>() = wx;
  m.bottomRightCorner<3, 3>() = wx;
  m.bottomLeftCorner<3, 3>() = skew(xi.transvec);
  return m;
}

Matrix6 se3_adjoint(const Pose3& p) {
  Matrix6 m = Matrix6::Zero();
  const Matrix3 r = p.rotation.matrix();
  m.topLeftCorner<3, 3>() = r;
  m.bottomRightCorner<3, 3>() = r;
  m.bottomLeftCorner<3, 3>() = skew(p.translation) * r;
  return m;
}

namespace {

// Jl(ξ) = Σ_{n≥0} ad(ξ)^n / (n+1)!, summed adaptively. Residual twists are
// small in practice, so this terminates in a handful of terms.
Matrix6 se3_left_jacobian(const Twist& xi) {
  const Matrix6 ad = se3_ad(xi);
  Matrix6 sum = Matrix6::Identity();
  Matrix6 term = Matrix6::Identity();
  for (int n = 1; n <= 120; ++n) {
    term = (term * ad) / static_cast<double>(n + 1);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-16 * sum.cwiseAbs().maxCoeff()) break;
  }
  return sum;
}

}  // namespace

Matrix6 se3_right_jacobian_inverse(const Twist& xi) {
  const Twist neg(-xi.rotvec, -xi.transvec);
  return se3_left_jacobian(neg).inverse();
}

Twist residual(const Factor& f, const std::map<NodeId, Pose3>& estimates) {
  const auto a_it = estimates.find(f.a);
  if (a_it == estimates.end()) throw std::out_of_range("dangling factor");
  if (!f.is_binary()) return log(compose(inverse(f.measurement), a_it->second));
  const auto b_it = estimates.find(*f.b);
  if (b_it == estimates.end()) throw std::out_of_range("dangling factor");
  return log(compose(inverse(f.measurement), between(a_it->second, b_it->second)));
}

ResidualJacobians residual_jacobians(const Factor& f, const std::map<NodeId, Pose3>& estimates) {
  ResidualJacobians out;
  out.r = residual(f, estimates);
  const Matrix6 jr_inv = se3_right_jacobian_inverse(out.r);
  if (!f.is_binary()) {
    out.jac_a = jr_inv;
    out.jac_b.setZero();
    return out;
  }
  const Pose3 x = between(estimates.at(f.a), estimates.at(*f.b));
  out.jac_b = jr_inv;
  out.jac_a = -jr_inv * se3_adjoint(inverse(x));
  return out;
}

void PoseGraph::add_node(NodeId id, const Pose3& initial_estimate) {
  if (!estimates_.emplace(id, initial_estimate).second) {
    throw std::invalid_argument("duplicate node");
  }
  ++structure_version_;
}

void PoseGraph::add_factor(const Factor& f) {
  f.validate();
  if (!has_node(f.a) || (f.b && !has_node(*f.b))) throw std::out_of_range("dangling factor");
  std::string key = factor_key(f);
  const auto pos = std::lower_bound(factor_keys_.begin(), factor_keys_.end(), key);
  const auto idx = pos - factor_keys_.begin();
  factor_keys_.insert(pos, std::move(key));
  factors_.insert(factors_.begin() + idx, f);
  ++structure_version_;
}

const Pose3& PoseGraph::estimate(NodeId id) const {
  const auto it = estimates_.find(id);
  if (it == estimates_.end()) throw std::out_of_range("unknown node");
  return it->second;
}

double PoseGraph::total_cost() const { return cost_of(factors_, estimates_); }

OptReport PoseGraph::optimize(const OptOptions& opts) {
  if (structure_version_ == optimized_version_) {
    OptReport cached = cached_report_;
    cached.from_cache = true;
    return cached;
  }

  bool any_prior = false;
  for (const Factor& f : factors_) any_prior |= f.kind == FactorKind::prior_anchor;
  if (!any_prior) throw std::logic_error("optimize requires a prior anchor");

  // Node indexing in map order (deterministic across replicas).
  std::map<NodeId, int> index;
  for (const auto& [id, est] : estimates_) index.emplace(id, static_cast<int>(index.size()));

  // Connected components over binary factors; a component is anchored when it
  // contains a node with a prior factor. Nodes under a pinning prior are held
  // fixed at the prior measurement.
  UnionFind uf(estimates_.size());
  std::set<NodeId> fixed;
  std::set<int> anchored_roots_pre;
  for (const Factor& f : factors_) {
    if (f.is_binary()) {
      uf.unite(index.at(f.a), index.at(*f.b));
    } else {
      anchored_roots_pre.insert(index.at(f.a));
      if (f.information.matrix().diagonal().minCoeff() >= kFixedPriorInfo) {
        fixed.insert(f.a);
        estimates_[f.a] = f.measurement;
      }
    }
  }
  std::set<int> anchored_roots;
  for (const int i : anchored_roots_pre) anchored_roots.insert(uf.find(i));

  OptReport report;
  std::map<NodeId, int> param_index;  // free node -> block index
  for (const auto& [id, idx] : index) {
    if (anchored_roots.count(uf.find(idx)) == 0) {
      report.skipped_nodes.push_back(id);
    } else if (fixed.count(id) == 0) {
      param_index.emplace(id, static_cast<int>(param_index.size()));
    }
  }
  report.n_optimized_nodes = static_cast<int>(param_index.size());

  // Factors whose endpoints live in an unanchored component contribute
  // constant cost and are left out of the normal equations.
  std::vector<char> active(factors_.size(), 1);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    active[i] = anchored_roots.count(uf.find(index.at(factors_[i].a))) > 0;
  }

  double cost = total_cost();
  report.initial_cost = cost;
  report.final_cost = cost;

  const int dim = 6 * static_cast<int>(param_index.size());
  if (dim == 0) {
    report.converged = true;
    optimized_version_ = structure_version_;
    cached_report_ = report;
    return report;
  }

  double lambda = opts.lambda_init;
  Eigen::SparseMatrix<double> h(dim, dim);
  Eigen::VectorXd g(dim);

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    // Linearize at the current estimates.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(factors_.size() * 144);
    g.setZero();
    auto add_block = [&](int bi, int bj, const Matrix6& m) {
      for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) triplets.emplace_back(6 * bi + r, 6 * bj + c, m(r, c));
    };
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (!active[i]) continue;
      const Factor& f = factors_[i];
      const auto pa = param_index.find(f.a);
      const auto pb = f.b ? param_index.find(*f.b) : param_index.end();
      const bool free_a = pa != param_index.end();
      const bool free_b = f.b && pb != param_index.end();
      if (!free_a && !free_b) continue;
      const ResidualJacobians rj = residual_jacobians(f, estimates_);
      const Vector6 rv = rj.r.vector();
      const Matrix6& info = f.information.matrix();
      const double e = rv.dot(info * rv);
      const double w = robust_weight(f.kind, e);
      if (free_a) {
        add_block(pa->second, pa->second, w * rj.jac_a.transpose() * info * rj.jac_a);
        g.segment<6>(6 * pa->second) += w * rj.jac_a.transpose() * (info * rv);
      }
      if (free_b) {
        add_block(pb->second, pb->second, w * rj.jac_b.transpose() * info * rj.jac_b);
        g.segment<6>(6 * pb->second) += w * rj.jac_b.transpose() * (info * rv);
      }
      if (free_a && free_b) {
        const Matrix6 hab = w * rj.jac_a.transpose() * info * rj.jac_b;
        add_block(pa->second, pb->second, hab);
        add_block(pb->second, pa->second, hab.transpose());
      }
    }
    h.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::VectorXd diag(dim);
    for (int i = 0; i < dim; ++i) diag[i] = std::max(h.coeff(i, i), 1e-12);

    // Damped attempts at this linearization point.
    bool accepted = false;
    while (!accepted) {
      Eigen::SparseMatrix<double> damped = h;
      for (int i = 0; i < dim; ++i) damped.coeffRef(i, i) += lambda * diag[i];
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(damped);
      Eigen::VectorXd step;
      bool solved = solver.info() == Eigen::Success;
      if (solved) {
        step = solver.solve(-g);
        solved = solver.info() == Eigen::Success && step.allFinite();
      }
      if (!solved) {
        lambda *= 10.0;
        if (lambda > kLambdaMax) throw std::runtime_error("optimization failed");
        continue;
      }
      std::map<NodeId, Pose3> candidate = estimates_;
      for (const auto& [id, block] : param_index) {
        candidate[id] = compose(candidate[id], exp(Twist::from_vector(step.segment<6>(6 * block))));
      }
      const double new_cost = cost_of(factors_, candidate);
      if (new_cost <= cost) {
        estimates_ = std::move(candidate);
        report.iterations = iter;
        const double decrease = cost - new_cost;
        cost = new_cost;
        lambda = std::max(lambda * 0.2, 1e-12);
        accepted = true;
        if (decrease <= opts.cost_tol * std::max(1.0, cost) ||
            step.lpNorm<Eigen::Infinity>() <= opts.step_tol) {
          report.converged = true;
        }
      } else {
        lambda *= 10.0;
        if (lambda > kLambdaMax) {
          // Solvable but no descent direction left: numerical floor reached.
          report.converged = true;
          break;
        }
      }
    }
    if (report.converged) break;
  }

  report.final_cost = cost;
  optimized_version_ = structure_version_;
  cached_report_ = report;
  return report;
}

bool PoseGraph::delta_applicable(const GraphDelta& delta) const {
  std::set<NodeId> announced;
  for (const NodeAnnounce& n : delta.nodes) announced.insert(n.id);
  for (const Factor& f : delta.factors) {
    if (!has_node(f.a) && announced.count(f.a) == 0) return false;
    if (f.b && !has_node(*f.b) && announced.count(*f.b) == 0) return false;
  }
  return true;
}

void PoseGraph::apply_now(const GraphDelta& delta) {
  // Place new nodes, dead-reckoning their initial estimates through the
  // delta's own factors where possible; announcement hints seed the rest.
  std::vector<NodeAnnounce> remaining;
  for (const NodeAnnounce& n : delta.nodes) {
    if (!has_node(n.id)) remaining.push_back(n);
  }
  auto place = [&](NodeId id, const Pose3& est) {
    estimates_.emplace(id, est);
    remaining.erase(std::find_if(remaining.begin(), remaining.end(),
                                 [&](const NodeAnnounce& n) { return n.id == id; }));
  };
  bool progress = true;
  while (progress && !remaining.empty()) {
    progress = false;
    for (const Factor& f : delta.factors) {
      const auto pending_node = [&](NodeId id) {
        return std::any_of(remaining.begin(), remaining.end(),
                           [&](const NodeAnnounce& n) { return n.id == id; });
      };
      if (!f.is_binary()) {
        if (pending_node(f.a)) {
          place(f.a, f.measurement);
          progress = true;
        }
        continue;
      }
      if (has_node(f.a) && pending_node(*f.b)) {
        place(*f.b, compose(estimates_.at(f.a), f.measurement));
        progress = true;
      } else if (has_node(*f.b) && pending_node(f.a)) {
        place(f.a, compose(estimates_.at(*f.b), inverse(f.measurement)));
        progress = true;
      }
    }
  }
  for (const NodeAnnounce& n : remaining) estimates_.emplace(n.id, n.estimate_hint);

  for (const Factor& f : delta.factors) {
    f.validate();
    std::string key = factor_key(f);
    const auto pos = std::lower_bound(factor_keys_.begin(), factor_keys_.end(), key);
    const auto idx = pos - factor_keys_.begin();
    factor_keys_.insert(pos, std::move(key));
    factors_.insert(factors_.begin() + idx, f);
  }
  ++structure_version_;
}

void PoseGraph::apply_delta(const GraphDelta& delta) {
  const auto key = std::make_pair(delta.origin, delta.seq);
  if (seen_deltas_.count(key)) return;
  seen_deltas_.insert(key);
  if (!delta_applicable(delta)) {
    pending_.push_back(delta);
    return;
  }
  apply_now(delta);

  // Newly available nodes may unblock buffered deltas, possibly in a chain.
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto it = pending_.begin(); it != pending_.end(); ++it) {
      if (delta_applicable(*it)) {
        const GraphDelta next = *it;
        pending_.erase(it);
        apply_now(next);
        progress = true;
        break;
      }
    }
  }
}

std::uint64_t PoseGraph::digest() const {
  std::string buf;
  buf.reserve(64 + estimates_.size() * 16 + factor_keys_.size() * 144);
  for (const auto& [id, est] : estimates_) {
    append_i64(buf, id.robot_id);
    append_i64(buf, id.submap_index);
  }
  for (const std::string& key : factor_keys_) buf += key;
  return Rng::fnv1a(buf);
}

std::string PoseGraph::dump() const {
  std::string out;
  for (const auto& [id, est] : estimates_) {
    out += "NODE " + std::to_string(id.robot_id) + " " + std::to_string(id.submap_index);
    for (const double v : est.to_array()) out += " " + fmt_double(v);
    out += "\n";
  }
  for (const Factor& f : factors_) {
    out += "FACTOR ";
    out += to_string(f.kind);
    out += " " + std::to_string(f.a.robot_id) + " " + std::to_string(f.a.submap_index);
    if (f.b) out += " " + std::to_string(f.b->robot_id) + " " + std::to_string(f.b->submap_index);
    for (const double v : f.measurement.to_array()) out += " " + fmt_double(v);
    const Matrix6& info = f.information.matrix();
    for (int i = 0; i < 6; ++i) out += " " + fmt_double(info(i, i));
    out += "\n";
  }
  return out;
}

}  // namespace slamsim
