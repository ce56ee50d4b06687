#include "slamsim/config.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace slamsim {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

// Typo safety: every object must consist solely of known keys.
void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      fail("unknown config key: " + path + "." + key);
    }
  }
}

double get_num(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(path + "." + key + " must be a number");
  return obj[key].get<double>();
}

std::uint64_t get_u64(const json& obj, const std::string& path, const char* key,
                      std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_unsigned()) fail(path + "." + key + " must be a nonnegative integer");
  return obj[key].get<std::uint64_t>();
}

int get_int(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(path + " requires " + key);
  if (!obj[key].is_number_integer()) fail(path + "." + key + " must be an integer");
  return obj[key].get<int>();
}

Vector3 get_vec3(const json& obj, const std::string& path, const char* key, const Vector3& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& a = obj[key];
  if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() || !a[2].is_number()) {
    fail(path + "." + key + " must be [x, y, z]");
  }
  return Vector3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

CameraIntrinsics parse_camera(const json& obj, const std::string& path, CameraIntrinsics base) {
  check_keys(obj, path, {"fx", "fy", "cx", "cy", "width", "height"});
  base.fx = get_num(obj, path, "fx", base.fx);
  base.fy = get_num(obj, path, "fy", base.fy);
  base.cx = get_num(obj, path, "cx", base.cx);
  base.cy = get_num(obj, path, "cy", base.cy);
  if (obj.contains("width")) base.width = get_int(obj, path, "width");
  if (obj.contains("height")) base.height = get_int(obj, path, "height");
  return base;
}

DriftModel parse_drift(const json& obj, const std::string& path) {
  check_keys(obj, path, {"trans_std_per_sqrt_m", "rot_std_per_sqrt_rad", "growth_rot", "growth_trans"});
  DriftModel d;
  d.trans_std_per_sqrt_m = get_num(obj, path, "trans_std_per_sqrt_m", 0.0);
  d.rot_std_per_sqrt_rad = get_num(obj, path, "rot_std_per_sqrt_rad", 0.0);
  const double gr = get_num(obj, path, "growth_rot", 0.0);
  const double gt = get_num(obj, path, "growth_trans", 0.0);
  d.covariance_growth = Matrix6::Zero();
  d.covariance_growth.topLeftCorner<3, 3>() = gr * Matrix3::Identity();
  d.covariance_growth.bottomRightCorner<3, 3>() = gt * Matrix3::Identity();
  return d;
}

LoopClosureModel parse_loop(const json& obj, const std::string& path) {
  check_keys(obj, path, {"recall", "revisit_radius", "trans_std", "rot_std"});
  LoopClosureModel m;
  m.recall = get_num(obj, path, "recall", m.recall);
  m.revisit_radius = get_num(obj, path, "revisit_radius", m.revisit_radius);
  m.trans_std = get_num(obj, path, "trans_std", m.trans_std);
  m.rot_std = get_num(obj, path, "rot_std", m.rot_std);
  return m;
}

void parse_error_curve(const json& arr, const std::string& path, DetectorModel& model) {
  if (!arr.is_array() || arr.empty()) fail(path + " must be a nonempty array");
  model.error_curve.clear();
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string kp = path + "[" + std::to_string(i) + "]";
    if (!arr[i].is_object()) fail(kp + " must be an object");
    check_keys(arr[i], kp, {"distance", "trans_std", "rot_std"});
    DetectorModel::ErrorKnot knot;
    knot.distance = get_num(arr[i], kp, "distance", -1.0);
    knot.trans_std = get_num(arr[i], kp, "trans_std", -1.0);
    knot.rot_std = get_num(arr[i], kp, "rot_std", -1.0);
    model.error_curve.push_back(knot);
  }
}

void parse_enablement(const json& obj, const std::string& path, DetectorEnablement& on) {
  if (!obj.contains("enabled")) return;
  const json& e = obj["enabled"];
  if (e.is_boolean()) {
    on.enabled = e.get<bool>();
    on.pairs.clear();
    return;
  }
  if (!e.is_array()) fail(path + ".enabled must be a bool or a list of [observer, target] pairs");
  on.enabled = true;
  on.pairs.clear();
  for (std::size_t i = 0; i < e.size(); ++i) {
    const json& p = e[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
      fail(path + ".enabled[" + std::to_string(i) + "] must be [observer, target]");
    }
    on.pairs.emplace(p[0].get<int>(), p[1].get<int>());
  }
}

void parse_detector(const json& obj, const std::string& path, DetectorModel& model,
                    DetectorEnablement& on) {
  check_keys(obj, path,
             {"enabled", "max_range", "view_angle", "detect_prob", "aspect_ratio_limit",
              "min_confidence", "error_curve"});
  parse_enablement(obj, path, on);
  model.max_range = get_num(obj, path, "max_range", model.max_range);
  model.max_view_angle = get_num(obj, path, "view_angle", model.max_view_angle);
  model.base_detect_prob = get_num(obj, path, "detect_prob", model.base_detect_prob);
  model.aspect_ratio_limit = get_num(obj, path, "aspect_ratio_limit", model.aspect_ratio_limit);
  model.min_confidence = get_num(obj, path, "min_confidence", model.min_confidence);
  if (obj.contains("error_curve")) parse_error_curve(obj["error_curve"], path + ".error_curve", model);
}

RobotSetup parse_robot(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"robot_id", "speed", "waypoints", "camera", "shape_half_extents", "drift",
              "loop_closure", "switch_threshold"});
  RobotSetup r;
  r.robot_id = get_int(obj, path, "robot_id");
  if (!obj.contains("speed")) fail(path + " requires speed");
  r.speed = get_num(obj, path, "speed", 0.0);
  if (!obj.contains("waypoints") || !obj["waypoints"].is_array()) {
    fail(path + " requires a waypoints array");
  }
  for (std::size_t i = 0; i < obj["waypoints"].size(); ++i) {
    const json& w = obj["waypoints"][i];
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
      fail(path + ".waypoints[" + std::to_string(i) + "] must be [x, y]");
    }
    r.waypoints.emplace_back(w[0].get<double>(), w[1].get<double>());
  }
  if (obj.contains("camera")) r.camera = parse_camera(obj["camera"], path + ".camera", r.camera);
  r.shape_half_extents = get_vec3(obj, path, "shape_half_extents", r.shape_half_extents);
  if (obj.contains("drift")) r.drift = parse_drift(obj["drift"], path + ".drift");
  if (obj.contains("loop_closure")) {
    r.loop_closure = parse_loop(obj["loop_closure"], path + ".loop_closure");
  }
  r.switch_threshold = get_num(obj, path, "switch_threshold", r.switch_threshold);
  return r;
}

json camera_json(const CameraIntrinsics& c) {
  return json{{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy},
              {"width", c.width}, {"height", c.height}};
}

json model_json(const DetectorModel& m) {
  json curve = json::array();
  for (const auto& k : m.error_curve) {
    curve.push_back(json{{"distance", k.distance}, {"trans_std", k.trans_std}, {"rot_std", k.rot_std}});
  }
  return json{{"max_range", m.max_range},         {"view_angle", m.max_view_angle},
              {"detect_prob", m.base_detect_prob}, {"aspect_ratio_limit", m.aspect_ratio_limit},
              {"min_confidence", m.min_confidence}, {"error_curve", curve}};
}

json pose_json(const Pose3& p) {
  json a = json::array();
  for (const double v : p.to_array()) a.push_back(v);
  return a;
}

}  // namespace

std::vector<int> MissionConfig::robot_ids() const {
  std::vector<int> ids{0};
  for (const RobotSetup& r : robots) ids.push_back(r.robot_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void MissionConfig::validate() const {
  if (arena_half_extent <= 0.0) fail("arena_half_extent must be positive");
  if (dt <= 0.0) fail("dt must be positive");
  if (duration < 0.0) fail("duration must be nonnegative");
  if (detection_period <= 0.0) fail("detection_period must be positive");
  try {
    lander_camera.validate();
    bus.validate();
    DetectorModel marker = marker_model;
    marker.kind = DetectorKind::marker;
    marker.validate();
    DetectorModel markerless = markerless_model;
    markerless.kind = DetectorKind::markerless;
    markerless.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (lander_shape_half_extents.minCoeff() <= 0.0) fail("lander shape half extents must be positive");

  std::set<int> seen{0};
  for (const RobotSetup& r : robots) {
    const std::string who = "robot " + std::to_string(r.robot_id);
    if (r.robot_id <= 0) fail(who + ": robot_id must be >= 1 (0 is the Lander)");
    if (!seen.insert(r.robot_id).second) fail(who + ": duplicate robot_id");
    if (r.speed <= 0.0) fail(who + ": speed must be positive");
    if (r.waypoints.size() < 2) fail(who + ": at least 2 waypoints required");
    for (const auto& w : r.waypoints) {
      if (std::abs(w.x()) > arena_half_extent || std::abs(w.y()) > arena_half_extent) {
        fail(who + ": waypoint outside the arena");
      }
    }
    if (r.shape_half_extents.minCoeff() <= 0.0) fail(who + ": shape half extents must be positive");
    if (r.switch_threshold <= 0.0) fail(who + ": switch_threshold must be positive");
    try {
      r.camera.validate();
      r.drift.validate();
      r.loop_closure.validate();
    } catch (const std::invalid_argument& e) {
      fail(who + ": " + e.what());
    }
  }
  for (const DetectorEnablement* on : {&marker_on, &markerless_on}) {
    for (const auto& [obs, tgt] : on->pairs) {
      if (obs == tgt) fail("detector pair observes itself");
      if (!seen.count(obs) || !seen.count(tgt)) {
        fail("detector pair references unknown robot " +
             std::to_string(seen.count(obs) ? tgt : obs));
      }
    }
  }
}

std::string MissionConfig::fingerprint() const {
  json j;
  j["arena_half_extent"] = arena_half_extent;
  j["dt"] = dt;
  j["duration"] = duration;
  j["detection_period"] = detection_period;
  j["lander"] = json{{"pose", pose_json(lander_pose)},
                     {"camera", camera_json(lander_camera)},
                     {"shape", {lander_shape_half_extents.x(), lander_shape_half_extents.y(),
                                lander_shape_half_extents.z()}}};
  j["marker"] = model_json(marker_model);
  j["markerless"] = model_json(markerless_model);
  j["bus"] = json{{"latency", bus.latency}, {"drop_prob", bus.drop_prob}};
  json robots_j = json::array();
  std::vector<const RobotSetup*> ordered;
  for (const RobotSetup& r : robots) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const RobotSetup* a, const RobotSetup* b) { return a->robot_id < b->robot_id; });
  for (const RobotSetup* r : ordered) {
    json waypoints = json::array();
    for (const auto& w : r->waypoints) waypoints.push_back(json::array({w.x(), w.y()}));
    robots_j.push_back(json{
        {"robot_id", r->robot_id},
        {"speed", r->speed},
        {"waypoints", waypoints},
        {"camera", camera_json(r->camera)},
        {"shape",
         {r->shape_half_extents.x(), r->shape_half_extents.y(), r->shape_half_extents.z()}},
        {"drift",
         {{"trans", r->drift.trans_std_per_sqrt_m},
          {"rot", r->drift.rot_std_per_sqrt_rad},
          {"growth_rot", r->drift.covariance_growth(0, 0)},
          {"growth_trans", r->drift.covariance_growth(3, 3)}}},
        {"loop",
         {{"recall", r->loop_closure.recall},
          {"radius", r->loop_closure.revisit_radius},
          {"trans_std", r->loop_closure.trans_std},
          {"rot_std", r->loop_closure.rot_std}}},
        {"switch_threshold", r->switch_threshold}});
  }
  j["robots"] = robots_j;

  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, Rng::fnv1a(j.dump()));
  return std::string(buf);
}

MissionConfig parse_mission_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("config parse error: ") + e.what());
  }
  if (!root.is_object()) fail("config root must be an object");
  check_keys(root, "config",
             {"arena_half_extent", "dt", "duration", "detection_period", "seed", "lander",
              "detectors", "bus", "robots"});

  MissionConfig cfg;
  cfg.arena_half_extent = get_num(root, "config", "arena_half_extent", cfg.arena_half_extent);
  cfg.dt = get_num(root, "config", "dt", cfg.dt);
  cfg.duration = get_num(root, "config", "duration", cfg.duration);
  cfg.detection_period = get_num(root, "config", "detection_period", cfg.detection_period);
  cfg.seed = get_u64(root, "config", "seed", cfg.seed);

  if (root.contains("lander")) {
    const json& l = root["lander"];
    check_keys(l, "lander", {"position", "yaw", "camera", "shape_half_extents"});
    const Vector3 pos = get_vec3(l, "lander", "position", Vector3::Zero());
    cfg.lander_pose = Pose3(Rotation::yaw(get_num(l, "lander", "yaw", 0.0)), pos);
    if (l.contains("camera")) {
      cfg.lander_camera = parse_camera(l["camera"], "lander.camera", cfg.lander_camera);
    }
    cfg.lander_shape_half_extents =
        get_vec3(l, "lander", "shape_half_extents", cfg.lander_shape_half_extents);
  }

  if (root.contains("detectors")) {
    const json& d = root["detectors"];
    check_keys(d, "detectors", {"marker", "markerless"});
    if (d.contains("marker")) {
      parse_detector(d["marker"], "detectors.marker", cfg.marker_model, cfg.marker_on);
    }
    if (d.contains("markerless")) {
      parse_detector(d["markerless"], "detectors.markerless", cfg.markerless_model,
                     cfg.markerless_on);
    }
  }

  if (root.contains("bus")) {
    const json& b = root["bus"];
    check_keys(b, "bus", {"latency", "drop_prob"});
    cfg.bus.latency = get_num(b, "bus", "latency", cfg.bus.latency);
    cfg.bus.drop_prob = get_num(b, "bus", "drop_prob", cfg.bus.drop_prob);
  }

  if (root.contains("robots")) {
    if (!root["robots"].is_array()) fail("robots must be an array");
    for (std::size_t i = 0; i < root["robots"].size(); ++i) {
      cfg.robots.push_back(
          parse_robot(root["robots"][i], "robots[" + std::to_string(i) + "]"));
    }
  }

  cfg.validate();
  return cfg;
}

MissionConfig load_mission_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mission_config(buf.str());
}

}  // namespace slamsim
