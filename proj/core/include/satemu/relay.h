#ifndef SATEMU_RELAY_H_
#define SATEMU_RELAY_H_

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "satemu/trace_model.h"

namespace satemu {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  // Accepts "a.b.c.d:port" or "hostname:port" (IPv4).
  // Throws kConfigError on a malformed string.
  static Endpoint Parse(std::string_view text);
  std::string ToString() const;

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct RelayConfig {
  Endpoint listen;
  Endpoint forward;
  DelayTrace delays;
  LossTrace loss;  // keyed by arrival order
  Nanoseconds send_interval = kDefaultSendInterval;  // reporting only

  // Stop receiving after this many datagrams; 0 means no limit.
  std::size_t max_packets = 0;
  // Stop once no datagram arrived for this long (counted from the first one).
  // Zero disables the timeout.
  std::chrono::milliseconds idle_timeout{0};
  // Datagrams in flight (received, not yet dispatched). Beyond this, arrivals
  // are refused and counted as queue overflows.
  std::size_t queue_capacity = 1 << 16;
  // The dispatcher sleeps until this close to a departure, then polls the
  // clock, yielding the CPU between polls.
  std::chrono::microseconds spin_window{2000};

  // Optional external stop request, polled by both contexts.
  const std::atomic<bool>* stop = nullptr;
  // Called from relay_run once the listen socket is bound, with the actual
  // local endpoint (useful with port 0).
  std::function<void(const Endpoint&)> on_listening;
};

struct RelayRecord {
  std::uint64_t send_index = 0;
  std::uint64_t arrival_rank = 0;
  std::uint32_t size = 0;
  // All times are nanoseconds since the session epoch.
  Nanoseconds receive_ns = 0;
  Nanoseconds imposed_delay_ns = 0;
  Nanoseconds intended_ns = 0;
  Nanoseconds actual_ns = 0;
  bool dropped = false;
  bool forward_failed = false;

  Nanoseconds error_ns() const { return actual_ns - intended_ns; }
};

struct SessionReport {
  std::vector<RelayRecord> records;  // indexed by send_index
  std::size_t forwarded = 0;
  std::size_t dropped = 0;
  std::size_t forward_failures = 0;
  std::size_t queue_overflows = 0;
  std::uint64_t egress_wraps = 0;
  std::uint64_t ingress_wraps = 0;
  Nanoseconds send_interval = kDefaultSendInterval;

  // Per send index: time spent inside the relay (actual forward time minus
  // receive time) or kLost for dropped or unforwardable datagrams.
  RawTrace ObservedTrace() const;

  // index,intended_ns,actual_ns,error_ns,dropped
  std::string FormatMetrics() const;
};

// Runs a userspace datagram relay that imposes the delay table on egress and
// the loss table at dispatch, in departure order.
//
// Two threads: the receive context owns the egress counter and timestamps
// arrivals; the dispatch context owns the EDT queue and the ingress counter.
// Returns once receiving has stopped and every queued datagram has been
// dispatched.
//
// Throws kConfigError (empty tables, bad endpoints), kIndexingMismatch,
// kLengthMismatch or kBindFailure.
SessionReport RelayRun(const RelayConfig& config);

}  // namespace satemu

#endif  // SATEMU_RELAY_H_
