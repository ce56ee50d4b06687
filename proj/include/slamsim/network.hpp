#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "slamsim/graph.hpp"
#include "slamsim/rng.hpp"

namespace slamsim {

struct BusConfig {
  double latency = 0.2;     // s, fixed per hop
  double drop_prob = 0.0;   // per transmission attempt

  void validate() const;
};

// A delta in flight or delivered.
struct BusMessage {
  int receiver = 0;
  double emit_time = 0.0;
  double deliver_time = 0.0;
  GraphDelta delta;
};

// Broadcast-only bus between robots: per ordered (sender, receiver) pair FIFO
// queues, fixed latency, and lossy links healed by at-least-once
// retransmission. A dropped transmission costs one extra latency period, so
// the effective delay is latency times a geometric attempt count; queue order
// still delivers FIFO per pair.
class MessageBus {
 public:
  MessageBus(std::vector<int> robot_ids, BusConfig config, Rng rng);

  void broadcast(const GraphDelta& delta, double now);

  // Releases every message due at `now`, per-pair FIFO, pairs served in
  // (sender, receiver) order.
  std::vector<BusMessage> step_deliveries(double now);

  std::size_t in_flight() const;

 private:
  std::vector<int> robot_ids_;
  BusConfig config_;
  Rng rng_;
  std::map<std::pair<int, int>, std::deque<BusMessage>> queues_;
};

// All per-robot digests, for replication checks.
struct ConsistencyReport {
  bool consistent = false;
  std::vector<std::pair<int, std::uint64_t>> digests;  // (robot_id, digest)
};

// Requires a drained bus: structural convergence is only guaranteed once
// every delta has been delivered.
ConsistencyReport check_consistency(const std::vector<std::pair<int, const PoseGraph*>>& graphs,
                                    const MessageBus& bus);

}  // namespace slamsim
