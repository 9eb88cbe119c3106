#include "satemu/event_queue.h"

#include <algorithm>
#include <string>

#include "satemu/errors.h"

namespace satemu {

EventQueue::EventQueue(std::size_t capacity) : capacity_(capacity) {}

bool EventQueue::Later(const ScheduledPacket& a, const ScheduledPacket& b) {
  if (a.departure_time != b.departure_time) {
    return a.departure_time > b.departure_time;
  }
  return a.send_index > b.send_index;
}

void EventQueue::Push(const ScheduledPacket& packet) {
  if (full()) {
    throw Error(ErrorCode::kQueueFull,
                "event queue at capacity " + std::to_string(capacity_));
  }
  if (packet.departure_time < packet.enqueue_time) {
    throw Error(ErrorCode::kInvalidParams,
                "departure before enqueue for packet " +
                    std::to_string(packet.send_index));
  }
  heap_.push_back(packet);
  std::push_heap(heap_.begin(), heap_.end(), Later);
}

ScheduledPacket EventQueue::Pop() {
  std::pop_heap(heap_.begin(), heap_.end(), Later);
  ScheduledPacket top = heap_.back();
  heap_.pop_back();
  return top;
}

}  // namespace satemu
