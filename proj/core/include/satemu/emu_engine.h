#ifndef SATEMU_EMU_ENGINE_H_
#define SATEMU_EMU_ENGINE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "satemu/event_queue.h"
#include "satemu/trace_model.h"

namespace satemu {

enum class Verdict { kPass, kDrop };

// Loaded delay and loss tables plus the two packet counters of the emulated
// link. Both counters wrap to zero at trace_len(), the same indexing law the
// kernel programs use.
//
// The egress side (delay lookup) and the ingress side (loss lookup) touch
// disjoint members, so one thread may drive each.
class LinkState {
 public:
  // `loss` must be keyed by arrival order and match `delays` in length.
  // Throws kEmptyTrace, kIndexingMismatch or kLengthMismatch.
  LinkState(DelayTrace delays, LossTrace loss);

  std::size_t trace_len() const { return delays_.size(); }
  std::size_t egress_index() const { return egress_index_; }
  std::size_t ingress_index() const { return ingress_index_; }
  std::uint64_t egress_wraps() const { return egress_wraps_; }
  std::uint64_t ingress_wraps() const { return ingress_wraps_; }

  const DelayTrace& delay_table() const { return delays_; }
  const LossTrace& loss_table() const { return loss_; }

  std::uint64_t PeekDelay() const { return delays_.delays[egress_index_]; }

  // Returns the delay at egress_index and advances it.
  std::uint64_t TakeEgressDelay();
  // Returns the loss flag at ingress_index and advances it.
  bool TakeIngressFlag();

 private:
  DelayTrace delays_;
  LossTrace loss_;
  std::size_t egress_index_ = 0;
  std::size_t ingress_index_ = 0;
  std::uint64_t egress_wraps_ = 0;
  std::uint64_t ingress_wraps_ = 0;
};

// Assigns departure_time = now + delay_table[egress_index], pushes the packet
// and advances the egress counter. On kQueueFull the counter is untouched so
// the caller can retry.
Nanoseconds EgressSchedule(LinkState& state, EventQueue& queue,
                           Nanoseconds now, std::uint64_t send_index,
                           std::uint64_t payload_ref = 0,
                           std::uint32_t size = 0);

// Consumes one arrival: kDrop iff loss_table[ingress_index] == 1.
Verdict IngressDecide(LinkState& state);

struct ObservedTrace {
  // Per send index: observed one-way delay, or kLost.
  std::vector<std::int64_t> entries;
  Nanoseconds send_interval = kDefaultSendInterval;
  // Send indices in the order they reached the ingress stage.
  std::vector<std::uint64_t> arrival_sequence;
  std::size_t delivered = 0;
  std::size_t dropped = 0;
  std::uint64_t egress_wraps = 0;
  std::uint64_t ingress_wraps = 0;

  RawTrace ToRawTrace() const { return RawTrace{entries, send_interval}; }
};

struct SimulateOptions {
  // Packets to inject; defaults to the trace length.
  std::optional<std::size_t> n_packets;
  // Allow n_packets > trace length, wrapping both tables.
  bool wrap = false;
};

// Virtual-clock replay. Packet i is injected at i * send_interval, scheduled
// through the EDT queue, and passed through the ingress loss stage in
// departure order. Deterministic: no wall clock is consulted.
//
// Throws kIndexingMismatch, kLengthMismatch, kEmptyTrace or kInvalidParams.
ObservedTrace Simulate(const DelayTrace& delays, const LossTrace& loss,
                       Nanoseconds send_interval,
                       const SimulateOptions& options = {});

}  // namespace satemu

#endif  // SATEMU_EMU_ENGINE_H_
