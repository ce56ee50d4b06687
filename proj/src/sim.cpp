#include "slamsim/sim.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "slamsim/agent.hpp"
#include "slamsim/network.hpp"

namespace slamsim {
namespace {

Pose3 planar_pose(const Eigen::Vector2d& xy, double yaw) {
  return Pose3(Rotation::yaw(yaw), Vector3(xy.x(), xy.y(), 0.0));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string csv_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct SimRobot {
  int id;
  Agent agent;
  CameraIntrinsics camera;
  RobotShapePrior shape;
  std::vector<Pose3> trajectory;  // empty: static (the Lander)
  Rng drift_rng;
  Rng loop_rng;
};

}  // namespace

std::vector<Pose3> generate_trajectory(const std::vector<Eigen::Vector2d>& waypoints,
                                       double speed, double dt) {
  if (waypoints.size() < 2) throw std::invalid_argument("trajectory needs at least 2 waypoints");
  if (speed <= 0.0 || dt <= 0.0) throw std::invalid_argument("speed and dt must be positive");

  std::vector<Eigen::Vector2d> pts;
  for (const auto& w : waypoints) {
    if (pts.empty() || (w - pts.back()).norm() > 1e-12) pts.push_back(w);
  }
  if (pts.size() < 2) throw std::invalid_argument("trajectory waypoints all coincide");

  std::vector<Pose3> out;
  double prev_yaw = 0.0;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const Eigen::Vector2d delta = pts[s + 1] - pts[s];
    const double len = delta.norm();
    const double yaw = std::atan2(delta.y(), delta.x());
    if (out.empty()) {
      out.push_back(planar_pose(pts[s], yaw));
    } else if (std::abs(Rotation::yaw(yaw - prev_yaw).angle()) > 1e-12) {
      out.push_back(planar_pose(pts[s], yaw));  // turn in place over one step
    }
    const long n = std::max(1L, std::lround(len / (speed * dt)));
    const Eigen::Vector2d dir = delta / len;
    const double spacing = len / static_cast<double>(n);
    for (long i = 1; i <= n; ++i) {
      out.push_back(planar_pose(pts[s] + dir * (spacing * static_cast<double>(i)), yaw));
    }
    prev_yaw = yaw;
  }
  return out;
}

MissionLog run_mission(const MissionConfig& cfg) {
  cfg.validate();
  MissionLog log;

  const std::vector<int> ids = cfg.robot_ids();
  MetaRecord meta;
  meta.seed = cfg.seed;
  meta.fingerprint = cfg.fingerprint();
  meta.marker_enabled = cfg.marker_on.enabled;
  meta.markerless_enabled = cfg.markerless_on.enabled;
  meta.dt = cfg.dt;
  meta.duration = cfg.duration;
  meta.robots = ids;
  log.records.push_back(meta);

  const Rng master(cfg.seed);

  std::vector<SimRobot> robots;
  robots.push_back(SimRobot{
      0,
      Agent(0, cfg.lander_pose, DriftModel{}, LoopClosureModel{}, 1e18),
      cfg.lander_camera,
      RobotShapePrior::from_half_extents(0, cfg.lander_shape_half_extents),
      {},
      master.derive("drift/0"),
      master.derive("loop/0")});
  for (const RobotSetup& r : cfg.robots) {
    std::vector<Pose3> traj = generate_trajectory(r.waypoints, r.speed, cfg.dt);
    const std::string sid = std::to_string(r.robot_id);
    robots.push_back(SimRobot{
        r.robot_id,
        Agent(r.robot_id, traj.front(), r.drift, r.loop_closure, r.switch_threshold),
        r.camera,
        RobotShapePrior::from_half_extents(r.robot_id, r.shape_half_extents),
        std::move(traj),
        master.derive("drift/" + sid),
        master.derive("loop/" + sid)});
  }
  std::sort(robots.begin(), robots.end(),
            [](const SimRobot& a, const SimRobot& b) { return a.id < b.id; });

  std::map<std::pair<std::string, std::pair<int, int>>, Rng> det_rngs;
  for (const int obs : ids) {
    for (const int tgt : ids) {
      if (obs == tgt) continue;
      for (const char* name : {"marker", "markerless"}) {
        const std::string label =
            std::string("det/") + name + "/" + std::to_string(obs) + "/" + std::to_string(tgt);
        det_rngs.emplace(std::make_pair(std::string(name), std::make_pair(obs, tgt)),
                         master.derive(label));
      }
    }
  }

  MessageBus bus(ids, cfg.bus, master.derive("bus"));

  const auto by_id = [&robots](int id) -> SimRobot& {
    for (SimRobot& r : robots) {
      if (r.id == id) return r;
    }
    throw std::logic_error("unknown robot id on the bus");
  };

  const auto log_steps = [&](double t) {
    for (SimRobot& r : robots) {
      StepRecord s;
      s.t = t;
      s.robot = r.id;
      s.gt = r.agent.state().gt_pose.to_array();
      s.est = r.agent.slam_estimate().to_array();
      s.node = r.agent.state().current_node;
      log.records.push_back(s);
    }
  };

  const auto deliver_due = [&](double t) {
    for (const BusMessage& m : bus.step_deliveries(t)) {
      by_id(m.receiver).agent.deliver(m.delta);
      MsgRecord rec;
      rec.t = t;
      rec.emit_time = m.emit_time;
      rec.origin = m.delta.origin;
      rec.seq = m.delta.seq;
      rec.receiver = m.receiver;
      log.records.push_back(rec);
    }
  };

  for (SimRobot& r : robots) {
    const GraphDelta d = r.agent.initial_delta();
    r.agent.deliver(d);
    bus.broadcast(d, 0.0);
  }
  log_steps(0.0);

  const long n_steps = std::lround(cfg.duration / cfg.dt);
  const long attempt_every = std::max(1L, std::lround(cfg.detection_period / cfg.dt));

  for (long k = 1; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    for (SimRobot& r : robots) r.agent.set_time(t);

    for (SimRobot& r : robots) {
      Pose3 motion;
      if (!r.trajectory.empty()) {
        const std::size_t last = r.trajectory.size() - 1;
        const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(k), last);
        const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(k - 1), last);
        motion = between(r.trajectory[j], r.trajectory[i]);
      }
      r.agent.propagate(motion, r.drift_rng);
    }

    for (SimRobot& r : robots) {
      if (auto d = r.agent.maybe_frame_switch()) {
        r.agent.deliver(*d);
        bus.broadcast(*d, t);
        SwitchRecord rec;
        rec.t = t;
        rec.robot = r.id;
        rec.node = r.agent.state().current_node;
        log.records.push_back(rec);
      }
      if (auto d = r.agent.maybe_loop_closure(r.loop_rng)) {
        r.agent.deliver(*d);
        bus.broadcast(*d, t);
        const Factor& f = d->factors.front();
        LoopRecord rec;
        rec.t = t;
        rec.robot = r.id;
        rec.a = f.a;
        rec.b = *f.b;
        log.records.push_back(rec);
      }
    }

    if (k % attempt_every == 0) {
      for (SimRobot& obs : robots) {
        for (SimRobot& tgt : robots) {
          if (obs.id == tgt.id) continue;
          const double dist =
              (obs.agent.state().gt_pose.translation - tgt.agent.state().gt_pose.translation)
                  .norm();
          std::optional<DetectionResult> marker_res;
          std::optional<DetectionResult> markerless_res;
          if (cfg.marker_on.active_for(obs.id, tgt.id)) {
            marker_res = attempt_detection(
                obs.agent.state(), tgt.agent.state(), obs.camera, cfg.marker_model, tgt.shape,
                det_rngs.at({"marker", {obs.id, tgt.id}}));
          }
          if (cfg.markerless_on.active_for(obs.id, tgt.id)) {
            markerless_res = attempt_detection(
                obs.agent.state(), tgt.agent.state(), obs.camera, cfg.markerless_model, tgt.shape,
                det_rngs.at({"markerless", {obs.id, tgt.id}}));
          }
          const bool marker_won = marker_res.has_value() && marker_res->ok();

          if (marker_res.has_value()) {
            DetRecord rec;
            rec.t = t;
            rec.observer = obs.id;
            rec.target = tgt.id;
            rec.model = DetectorKind::marker;
            rec.accepted = marker_res->ok();
            rec.reason = rec.accepted ? "" : to_string(marker_res->miss);
            rec.distance = dist;
            if (rec.accepted) rec.measured = marker_res->constraint->measured_relative_pose.to_array();
            log.records.push_back(rec);
          }
          if (markerless_res.has_value()) {
            const bool fired = markerless_res->ok();
            DetRecord rec;
            rec.t = t;
            rec.observer = obs.id;
            rec.target = tgt.id;
            rec.model = DetectorKind::markerless;
            rec.accepted = fired && !marker_won;
            rec.reason = rec.accepted ? "" : (fired ? "superseded" : to_string(markerless_res->miss));
            rec.distance = dist;
            if (markerless_res->candidate.has_value()) {
              const CandidateDetection& c = *markerless_res->candidate;
              rec.confidence = c.confidence;
              rec.bbox = {c.bbox.xmin, c.bbox.ymin, c.bbox.xmax, c.bbox.ymax};
              rec.borders = c.border_touch_count;
            }
            if (rec.accepted) {
              rec.measured = markerless_res->constraint->measured_relative_pose.to_array();
            }
            log.records.push_back(rec);
          }

          const DetectionConstraint* kept = nullptr;
          if (marker_won) {
            kept = &*marker_res->constraint;
          } else if (markerless_res.has_value() && markerless_res->ok()) {
            kept = &*markerless_res->constraint;
          }
          if (kept != nullptr) {
            const DetectionExchange ex{tgt.agent.state().current_node, tgt.agent.local_offset()};
            const GraphDelta d = obs.agent.ingest_detection(*kept, ex);
            obs.agent.deliver(d);
            bus.broadcast(d, t);
          }
        }
      }
    }

    deliver_due(t);

    for (SimRobot& r : robots) {
      try {
        r.agent.optimize();
      } catch (const std::exception& e) {
        OptFailRecord rec;
        rec.t = t;
        rec.robot = r.id;
        rec.error = e.what();
        log.records.push_back(rec);
      }
    }

    log_steps(t);
  }

  // Everything emitted must land before the replicas are compared.
  double t_drain = static_cast<double>(n_steps) * cfg.dt;
  long guard = 0;
  while (bus.in_flight() > 0) {
    if (++guard > 2000000L) throw std::runtime_error("bus failed to drain");
    t_drain += cfg.dt;
    deliver_due(t_drain);
  }

  for (SimRobot& r : robots) {
    try {
      const OptReport rep = r.agent.optimize();
      FinalOptRecord rec;
      rec.robot = r.id;
      rec.iterations = rep.iterations;
      rec.initial_cost = rep.initial_cost;
      rec.final_cost = rep.final_cost;
      rec.converged = rep.converged;
      rec.n_optimized_nodes = rep.n_optimized_nodes;
      rec.n_skipped_nodes = static_cast<int>(rep.skipped_nodes.size());
      log.records.push_back(rec);
    } catch (const std::exception& e) {
      OptFailRecord rec;
      rec.t = t_drain;
      rec.robot = r.id;
      rec.error = e.what();
      log.records.push_back(rec);
    }
  }

  std::vector<std::pair<int, const PoseGraph*>> graphs;
  for (const SimRobot& r : robots) graphs.emplace_back(r.id, &r.agent.graph());
  const ConsistencyReport consistency = check_consistency(graphs, bus);
  ConsistencyRecord crec;
  crec.consistent = consistency.consistent;
  for (const auto& [id, digest] : consistency.digests) crec.digests.emplace_back(id, hex64(digest));
  log.records.push_back(crec);

  const MetricsReport metrics = compute_metrics(log);
  EndRecord end;
  end.t = cfg.duration;
  for (const auto& [id, m] : metrics.per_robot) {
    EndRecord::RobotSummary s;
    s.robot = id;
    s.n_detections = m.n_detections;
    s.max_detection_distance = m.max_detection_distance;
    s.max_open_loop_duration = m.max_open_loop_duration;
    s.trajectory_rmse = m.trajectory_rmse;
    end.per_robot.push_back(s);
  }
  log.records.push_back(end);
  return log;
}

MetricsReport replay_metrics(const MissionLog& log) {
  if (!log.complete()) throw std::runtime_error("incomplete log");
  return compute_metrics(log);
}

void write_trajectory_csv(const MissionLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "time,robot_id,gt_x,gt_y,gt_z,est_x,est_y,est_z,err_m\n";
  for (const LogRecord& rec : log.records) {
    const auto* s = std::get_if<StepRecord>(&rec);
    if (s == nullptr) continue;
    const double dx = s->gt[4] - s->est[4];
    const double dy = s->gt[5] - s->est[5];
    const double dz = s->gt[6] - s->est[6];
    const double err = std::sqrt(dx * dx + dy * dy + dz * dz);
    out << csv_num(s->t) << ',' << s->robot << ',' << csv_num(s->gt[4]) << ',' << csv_num(s->gt[5])
        << ',' << csv_num(s->gt[6]) << ',' << csv_num(s->est[4]) << ',' << csv_num(s->est[5])
        << ',' << csv_num(s->est[6]) << ',' << csv_num(err) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string metrics_csv(const MetricsReport& report) {
  std::string out = "robot,n_detections,max_detection_distance,max_open_loop_duration,trajectory_rmse\n";
  for (const auto& [id, m] : report.per_robot) {
    out += std::to_string(id) + "," + std::to_string(m.n_detections) + "," +
           csv_num(m.max_detection_distance) + "," + csv_num(m.max_open_loop_duration) + "," +
           csv_num(m.trajectory_rmse) + "\n";
  }
  return out;
}

}  // namespace slamsim
