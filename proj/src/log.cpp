#include "slamsim/log.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <zlib.h>

namespace slamsim {
namespace {

using nlohmann::json;

json node_json(const NodeId& id) { return json::array({id.robot_id, id.submap_index}); }

NodeId node_from(const json& a) {
  return NodeId{a.at(0).get<int>(), a.at(1).get<int>()};
}

template <std::size_t N>
json arr_json(const std::array<double, N>& a) {
  json out = json::array();
  for (const double v : a) out.push_back(v);
  return out;
}

template <std::size_t N>
std::array<double, N> arr_from(const json& a) {
  std::array<double, N> out{};
  if (a.size() != N) throw std::runtime_error("log: bad array length");
  for (std::size_t i = 0; i < N; ++i) out[i] = a.at(i).get<double>();
  return out;
}

json to_json(const MetaRecord& r) {
  return json{{"type", "meta"},
              {"seed", r.seed},
              {"fingerprint", r.fingerprint},
              {"marker", r.marker_enabled},
              {"markerless", r.markerless_enabled},
              {"dt", r.dt},
              {"duration", r.duration},
              {"robots", r.robots}};
}

json to_json(const StepRecord& r) {
  return json{{"type", "step"}, {"t", r.t},         {"robot", r.robot},
              {"gt", arr_json(r.gt)}, {"est", arr_json(r.est)}, {"node", node_json(r.node)}};
}

json to_json(const DetRecord& r) {
  json j{{"type", "det"},     {"t", r.t},
         {"obs", r.observer}, {"tgt", r.target},
         {"model", r.model == DetectorKind::marker ? "marker" : "markerless"},
         {"accepted", r.accepted}, {"reason", r.reason}, {"dist", r.distance}};
  if (r.confidence) j["conf"] = *r.confidence;
  if (r.bbox) j["bbox"] = arr_json(*r.bbox);
  if (r.borders) j["borders"] = *r.borders;
  if (r.measured) j["meas"] = arr_json(*r.measured);
  return j;
}

json to_json(const SwitchRecord& r) {
  return json{{"type", "switch"}, {"t", r.t}, {"robot", r.robot}, {"node", node_json(r.node)}};
}

json to_json(const LoopRecord& r) {
  return json{{"type", "loop"}, {"t", r.t}, {"robot", r.robot},
              {"a", node_json(r.a)}, {"b", node_json(r.b)}};
}

json to_json(const MsgRecord& r) {
  return json{{"type", "msg"},       {"t", r.t},   {"emit", r.emit_time},
              {"origin", r.origin},  {"seq", r.seq}, {"receiver", r.receiver}};
}

json to_json(const OptFailRecord& r) {
  return json{{"type", "opt_fail"}, {"t", r.t}, {"robot", r.robot}, {"error", r.error}};
}

json to_json(const FinalOptRecord& r) {
  return json{{"type", "final_opt"},   {"robot", r.robot},
              {"iterations", r.iterations}, {"initial_cost", r.initial_cost},
              {"final_cost", r.final_cost}, {"converged", r.converged},
              {"optimized", r.n_optimized_nodes}, {"skipped", r.n_skipped_nodes}};
}

json to_json(const ConsistencyRecord& r) {
  json digests = json::array();
  for (const auto& [robot, hex] : r.digests) digests.push_back(json::array({robot, hex}));
  return json{{"type", "consistency"}, {"consistent", r.consistent}, {"digests", digests}};
}

json to_json(const EndRecord& r) {
  json per = json::array();
  for (const auto& s : r.per_robot) {
    per.push_back(json{{"robot", s.robot},
                       {"n_detections", s.n_detections},
                       {"max_detection_distance", s.max_detection_distance},
                       {"max_open_loop_duration", s.max_open_loop_duration},
                       {"trajectory_rmse", s.trajectory_rmse}});
  }
  return json{{"type", "end"}, {"t", r.t}, {"metrics", per}};
}

LogRecord record_from(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "meta") {
    MetaRecord r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.marker_enabled = j.at("marker").get<bool>();
    r.markerless_enabled = j.at("markerless").get<bool>();
    r.dt = j.at("dt").get<double>();
    r.duration = j.at("duration").get<double>();
    r.robots = j.at("robots").get<std::vector<int>>();
    return r;
  }
  if (type == "step") {
    StepRecord r;
    r.t = j.at("t").get<double>();
    r.robot = j.at("robot").get<int>();
    r.gt = arr_from<7>(j.at("gt"));
    r.est = arr_from<7>(j.at("est"));
    r.node = node_from(j.at("node"));
    return r;
  }
  if (type == "det") {
    DetRecord r;
    r.t = j.at("t").get<double>();
    r.observer = j.at("obs").get<int>();
    r.target = j.at("tgt").get<int>();
    r.model = j.at("model").get<std::string>() == "marker" ? DetectorKind::marker
                                                           : DetectorKind::markerless;
    r.accepted = j.at("accepted").get<bool>();
    r.reason = j.at("reason").get<std::string>();
    r.distance = j.at("dist").get<double>();
    if (j.contains("conf")) r.confidence = j.at("conf").get<double>();
    if (j.contains("bbox")) r.bbox = arr_from<4>(j.at("bbox"));
    if (j.contains("borders")) r.borders = j.at("borders").get<int>();
    if (j.contains("meas")) r.measured = arr_from<7>(j.at("meas"));
    return r;
  }
  if (type == "switch") {
    SwitchRecord r;
    r.t = j.at("t").get<double>();
    r.robot = j.at("robot").get<int>();
    r.node = node_from(j.at("node"));
    return r;
  }
  if (type == "loop") {
    LoopRecord r;
    r.t = j.at("t").get<double>();
    r.robot = j.at("robot").get<int>();
    r.a = node_from(j.at("a"));
    r.b = node_from(j.at("b"));
    return r;
  }
  if (type == "msg") {
    MsgRecord r;
    r.t = j.at("t").get<double>();
    r.emit_time = j.at("emit").get<double>();
    r.origin = j.at("origin").get<int>();
    r.seq = j.at("seq").get<std::uint64_t>();
    r.receiver = j.at("receiver").get<int>();
    return r;
  }
  if (type == "opt_fail") {
    OptFailRecord r;
    r.t = j.at("t").get<double>();
    r.robot = j.at("robot").get<int>();
    r.error = j.at("error").get<std::string>();
    return r;
  }
  if (type == "final_opt") {
    FinalOptRecord r;
    r.robot = j.at("robot").get<int>();
    r.iterations = j.at("iterations").get<int>();
    r.initial_cost = j.at("initial_cost").get<double>();
    r.final_cost = j.at("final_cost").get<double>();
    r.converged = j.at("converged").get<bool>();
    r.n_optimized_nodes = j.at("optimized").get<int>();
    r.n_skipped_nodes = j.at("skipped").get<int>();
    return r;
  }
  if (type == "consistency") {
    ConsistencyRecord r;
    r.consistent = j.at("consistent").get<bool>();
    for (const json& d : j.at("digests")) {
      r.digests.emplace_back(d.at(0).get<int>(), d.at(1).get<std::string>());
    }
    return r;
  }
  if (type == "end") {
    EndRecord r;
    r.t = j.at("t").get<double>();
    for (const json& s : j.at("metrics")) {
      EndRecord::RobotSummary rs;
      rs.robot = s.at("robot").get<int>();
      rs.n_detections = s.at("n_detections").get<int>();
      rs.max_detection_distance = s.at("max_detection_distance").get<double>();
      rs.max_open_loop_duration = s.at("max_open_loop_duration").get<double>();
      rs.trajectory_rmse = s.at("trajectory_rmse").get<double>();
      r.per_robot.push_back(rs);
    }
    return r;
  }
  throw std::runtime_error("log: unknown record type: " + type);
}

}  // namespace

const MetaRecord& MissionLog::meta() const {
  if (records.empty() || !std::holds_alternative<MetaRecord>(records.front())) {
    throw std::runtime_error("log has no meta record");
  }
  return std::get<MetaRecord>(records.front());
}

bool MissionLog::complete() const {
  return !records.empty() && std::holds_alternative<EndRecord>(records.back());
}

const EndRecord& MissionLog::end() const {
  if (!complete()) throw std::runtime_error("incomplete log");
  return std::get<EndRecord>(records.back());
}

std::string to_ndjson(const MissionLog& log) {
  std::string out;
  for (const LogRecord& rec : log.records) {
    const json j = std::visit([](const auto& r) { return to_json(r); }, rec);
    out += j.dump();
    out += '\n';
  }
  return out;
}

MissionLog parse_ndjson(const std::string& text) {
  MissionLog log;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      log.records.push_back(record_from(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return log;
}

std::string gzip_compress(const std::string& bytes) {
  z_stream strm{};
  if (deflateInit2(&strm, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) !=
      Z_OK) {
    throw std::runtime_error("deflateInit2 failed");
  }
  gz_header header{};
  header.time = 0;  // pinned: equal inputs give equal archives
  header.os = 255;
  deflateSetHeader(&strm, &header);

  std::string out;
  out.resize(deflateBound(&strm, static_cast<uLong>(bytes.size())) + 32);
  strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  strm.avail_in = static_cast<uInt>(bytes.size());
  strm.next_out = reinterpret_cast<Bytef*>(out.data());
  strm.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&strm, Z_FINISH);
  if (rc != Z_STREAM_END) {
    deflateEnd(&strm);
    throw std::runtime_error("deflate failed");
  }
  out.resize(strm.total_out);
  deflateEnd(&strm);
  return out;
}

std::string gzip_decompress(const std::string& bytes) {
  z_stream strm{};
  if (inflateInit2(&strm, 15 + 32) != Z_OK) throw std::runtime_error("inflateInit2 failed");
  std::string out;
  std::string chunk(1 << 16, '\0');
  strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  strm.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    strm.next_out = reinterpret_cast<Bytef*>(chunk.data());
    strm.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&strm);
      throw std::runtime_error("inflate failed: corrupt log archive");
    }
    out.append(chunk.data(), chunk.size() - strm.avail_out);
  }
  inflateEnd(&strm);
  return out;
}

namespace {

bool has_gz_suffix(const std::string& path) {
  return path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

}  // namespace

void write_mission_log(const MissionLog& log, const std::string& path) {
  std::string bytes = to_ndjson(log);
  if (has_gz_suffix(path)) bytes = gzip_compress(bytes);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

MissionLog read_mission_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open log: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  if (has_gz_suffix(path)) bytes = gzip_decompress(bytes);
  return parse_ndjson(bytes);
}

}  // namespace slamsim
