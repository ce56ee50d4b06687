#include "slamsim/network.hpp"

#include <algorithm>
#include <stdexcept>

namespace slamsim {

void BusConfig::validate() const {
  if (latency < 0.0) throw std::invalid_argument("bus: negative latency");
  if (drop_prob < 0.0 || drop_prob >= 1.0) {
    throw std::invalid_argument("bus: drop probability outside [0,1)");
  }
}

MessageBus::MessageBus(std::vector<int> robot_ids, BusConfig config, Rng rng)
    : robot_ids_(std::move(robot_ids)), config_(config), rng_(rng) {
  config_.validate();
  std::sort(robot_ids_.begin(), robot_ids_.end());
}

void MessageBus::broadcast(const GraphDelta& delta, double now) {
  for (const int receiver : robot_ids_) {
    if (receiver == delta.origin) continue;
    // Geometric attempt count stands in for resend-until-acked; each failed
    // attempt costs one latency period. Capped since drop_prob < 1.
    int attempts = 1;
    while (attempts < 1000 && rng_.bernoulli(config_.drop_prob)) ++attempts;
    BusMessage msg;
    msg.receiver = receiver;
    msg.emit_time = now;
    msg.deliver_time = now + attempts * config_.latency;
    msg.delta = delta;
    auto& queue = queues_[{delta.origin, receiver}];
    if (!queue.empty()) {
      // FIFO per pair: a slow head blocks the line.
      msg.deliver_time = std::max(msg.deliver_time, queue.back().deliver_time);
    }
    queue.push_back(std::move(msg));
  }
}

std::vector<BusMessage> MessageBus::step_deliveries(double now) {
  std::vector<BusMessage> due;
  for (auto& [pair, queue] : queues_) {
    while (!queue.empty() && queue.front().deliver_time <= now) {
      due.push_back(std::move(queue.front()));
      queue.pop_front();
    }
  }
  return due;
}

std::size_t MessageBus::in_flight() const {
  std::size_t n = 0;
  for (const auto& [pair, queue] : queues_) n += queue.size();
  return n;
}

ConsistencyReport check_consistency(const std::vector<std::pair<int, const PoseGraph*>>& graphs,
                                    const MessageBus& bus) {
  if (bus.in_flight() > 0) throw std::logic_error("bus not drained");
  ConsistencyReport report;
  for (const auto& [robot_id, graph] : graphs) {
    report.digests.emplace_back(robot_id, graph->digest());
  }
  report.consistent = true;
  for (const auto& [robot_id, digest] : report.digests) {
    report.consistent &= digest == report.digests.front().second;
  }
  return report;
}

}  // namespace slamsim
