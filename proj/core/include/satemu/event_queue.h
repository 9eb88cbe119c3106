#ifndef SATEMU_EVENT_QUEUE_H_
#define SATEMU_EVENT_QUEUE_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "satemu/trace_model.h"

namespace satemu {

// A packet waiting for its earliest departure time.
struct ScheduledPacket {
  std::uint64_t send_index = 0;
  Nanoseconds enqueue_time = 0;
  Nanoseconds departure_time = 0;
  std::uint64_t payload_ref = 0;  // opaque to the queue
  std::uint32_t size = 0;

  friend bool operator==(const ScheduledPacket&,
                         const ScheduledPacket&) = default;
};

// Exact EDT priority queue ordered by (departure_time, send_index).
//
// Departure times are kept at full nanosecond precision; there is no slot
// quantisation as in a timing wheel.
class EventQueue {
 public:
  static constexpr std::size_t kUnbounded =
      std::numeric_limits<std::size_t>::max();

  explicit EventQueue(std::size_t capacity = kUnbounded);

  std::size_t size() const { return heap_.size(); }
  bool empty() const { return heap_.empty(); }
  bool full() const { return heap_.size() >= capacity_; }
  std::size_t capacity() const { return capacity_; }

  // Throws kQueueFull when at capacity and kInvalidParams when the packet
  // would depart before it was enqueued.
  void Push(const ScheduledPacket& packet);

  // Precondition: !empty().
  const ScheduledPacket& Top() const { return heap_.front(); }
  ScheduledPacket Pop();

 private:
  static bool Later(const ScheduledPacket& a, const ScheduledPacket& b);

  std::size_t capacity_;
  std::vector<ScheduledPacket> heap_;
};

}  // namespace satemu

#endif  // SATEMU_EVENT_QUEUE_H_
