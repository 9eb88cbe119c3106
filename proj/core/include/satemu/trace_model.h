#ifndef SATEMU_TRACE_MODEL_H_
#define SATEMU_TRACE_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace satemu {

// All delays and timestamps are integer nanoseconds.
using Nanoseconds = std::int64_t;

inline constexpr Nanoseconds kMillisecond = 1'000'000;
inline constexpr Nanoseconds kSecond = 1'000'000'000;
inline constexpr Nanoseconds kDefaultSendInterval = 10 * kMillisecond;

// Sentinel for a lost packet in a RawTrace.
inline constexpr std::int64_t kLost = -1;

// Largest delay a 32-bit kernel map value can carry.
inline constexpr std::uint64_t kMaxMapValue = 0xFFFFFFFFull;

// Per-packet measured delays in send order. entries[i] > 0 is the delay of
// packet i; entries[i] == kLost marks it lost.
struct RawTrace {
  std::vector<std::int64_t> entries;
  Nanoseconds send_interval = kDefaultSendInterval;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  friend bool operator==(const RawTrace&, const RawTrace&) = default;
};

// Strictly positive per-packet delays, send order. Lost packets carry the
// delay of a neighbouring delivered packet.
struct DelayTrace {
  std::vector<std::uint64_t> delays;

  std::size_t size() const { return delays.size(); }
  bool empty() const { return delays.empty(); }

  friend bool operator==(const DelayTrace&, const DelayTrace&) = default;
};

enum class LossIndexing {
  kSendOrder,     // flags[i] refers to the i-th packet sent
  kArrivalOrder,  // flags[k] refers to the k-th packet to reach the receiver
};

struct LossTrace {
  std::vector<std::uint8_t> flags;
  LossIndexing indexing = LossIndexing::kSendOrder;

  std::size_t size() const { return flags.size(); }
  std::size_t loss_count() const;

  friend bool operator==(const LossTrace&, const LossTrace&) = default;
};

// order[k] is the sender index of the k-th packet to arrive.
struct ArrivalPermutation {
  std::vector<std::size_t> order;

  std::size_t size() const { return order.size(); }
  ArrivalPermutation inverse() const;
  bool is_valid() const;

  friend bool operator==(const ArrivalPermutation&,
                         const ArrivalPermutation&) = default;
};

struct SplitResult {
  DelayTrace delays;
  LossTrace loss;  // always kSendOrder
};

// Splits a raw trace into a delay trace and a send-order loss trace.
//
// A lost packet takes the delay of the nearest preceding delivered packet, so
// it reaches the receiver no earlier than its predecessor. Runs of losses
// carry the same value forward; losses at the very start of the trace take
// the first delivered delay instead, since they have no predecessor.
//
// Throws kEmptyTrace, kAllLost or kInvalidEntry.
SplitResult SplitTrace(const RawTrace& raw);

// Sorts packets by arrival time i * send_interval + delays[i], ties broken by
// ascending sender index. Throws kEmptyTrace or kInvalidParams.
ArrivalPermutation ComputeArrivalOrder(const DelayTrace& delays,
                                       Nanoseconds send_interval);

// Arrival time of packet `index` given its delay.
Nanoseconds ArrivalTime(std::size_t index, std::uint64_t delay,
                        Nanoseconds send_interval);

// Re-keys a send-order loss trace by arrival rank:
// result.flags[k] = loss.flags[perm.order[k]].
// Throws kLengthMismatch or kWrongIndexing.
LossTrace ReorderLoss(const LossTrace& loss, const ArrivalPermutation& perm);

// Inverse of SplitTrace: kLost where flagged, otherwise the delay.
// Throws kLengthMismatch or kWrongIndexing.
RawTrace Reconstruct(const DelayTrace& delays, const LossTrace& loss,
                     Nanoseconds send_interval = kDefaultSendInterval);

struct TraceDiagnostics {
  std::size_t entries = 0;
  std::size_t losses = 0;
  std::size_t invalid = 0;
  std::vector<std::size_t> invalid_indices;
  std::int64_t max_delay = 0;
  bool fits_32bit = true;  // every positive delay <= kMaxMapValue
  bool interval_valid = true;
};

// Never throws; an empty trace yields all-zero counts.
TraceDiagnostics Validate(const RawTrace& raw);

// True when the entry is a positive delay or exactly kLost.
inline bool IsValidEntry(std::int64_t entry) {
  return entry > 0 || entry == kLost;
}

}  // namespace satemu

#endif  // SATEMU_TRACE_MODEL_H_
