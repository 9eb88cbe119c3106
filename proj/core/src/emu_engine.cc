#include "satemu/emu_engine.h"

#include <string>
#include <utility>

#include "satemu/errors.h"

namespace satemu {

LinkState::LinkState(DelayTrace delays, LossTrace loss)
    : delays_(std::move(delays)), loss_(std::move(loss)) {
  if (delays_.empty()) throw Error(ErrorCode::kEmptyTrace, "empty delay table");
  if (loss_.indexing != LossIndexing::kArrivalOrder) {
    throw Error(ErrorCode::kIndexingMismatch,
                "loss table must be keyed by arrival order");
  }
  if (loss_.size() != delays_.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "delay table has " + std::to_string(delays_.size()) +
                    " entries, loss table has " + std::to_string(loss_.size()));
  }
}

std::uint64_t LinkState::TakeEgressDelay() {
  const std::uint64_t delay = delays_.delays[egress_index_];
  if (++egress_index_ >= delays_.size()) {
    egress_index_ = 0;
    ++egress_wraps_;
  }
  return delay;
}

bool LinkState::TakeIngressFlag() {
  const bool lost = loss_.flags[ingress_index_] != 0;
  if (++ingress_index_ >= loss_.size()) {
    ingress_index_ = 0;
    ++ingress_wraps_;
  }
  return lost;
}

Nanoseconds EgressSchedule(LinkState& state, EventQueue& queue,
                           Nanoseconds now, std::uint64_t send_index,
                           std::uint64_t payload_ref, std::uint32_t size) {
  if (queue.full()) {
    throw Error(ErrorCode::kQueueFull,
                "cannot schedule packet " + std::to_string(send_index));
  }
  ScheduledPacket packet;
  packet.send_index = send_index;
  packet.enqueue_time = now;
  packet.departure_time =
      now + static_cast<Nanoseconds>(state.PeekDelay());
  packet.payload_ref = payload_ref;
  packet.size = size;
  queue.Push(packet);
  state.TakeEgressDelay();
  return packet.departure_time;
}

Verdict IngressDecide(LinkState& state) {
  return state.TakeIngressFlag() ? Verdict::kDrop : Verdict::kPass;
}

ObservedTrace Simulate(const DelayTrace& delays, const LossTrace& loss,
                       Nanoseconds send_interval,
                       const SimulateOptions& options) {
  if (send_interval <= 0) {
    throw Error(ErrorCode::kInvalidParams, "send interval must be positive");
  }
  LinkState state(delays, loss);

  const std::size_t n = options.n_packets.value_or(state.trace_len());
  if (n > state.trace_len() && !options.wrap) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(n) + " packets requested from a trace of " +
                    std::to_string(state.trace_len()) +
                    " entries without cyclic replay");
  }

  ObservedTrace observed;
  observed.send_interval = send_interval;
  observed.entries.assign(n, kLost);
  observed.arrival_sequence.reserve(n);

  EventQueue queue;
  std::size_t next_inject = 0;
  auto inject_time = [&](std::size_t i) {
    return static_cast<Nanoseconds>(i) * send_interval;
  };

  while (next_inject < n || !queue.empty()) {
    // A departure due no later than the next injection is delivered first.
    const bool deliver =
        !queue.empty() &&
        (next_inject >= n ||
         queue.Top().departure_time <= inject_time(next_inject));
    if (deliver) {
      const ScheduledPacket packet = queue.Pop();
      observed.arrival_sequence.push_back(packet.send_index);
      if (IngressDecide(state) == Verdict::kDrop) {
        ++observed.dropped;
      } else {
        ++observed.delivered;
        observed.entries[packet.send_index] =
            packet.departure_time - packet.enqueue_time;
      }
    } else {
      EgressSchedule(state, queue, inject_time(next_inject), next_inject);
      ++next_inject;
    }
  }

  observed.egress_wraps = state.egress_wraps();
  observed.ingress_wraps = state.ingress_wraps();
  return observed;
}

}  // namespace satemu
