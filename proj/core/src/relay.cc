#include "satemu/relay.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <utility>

#include "satemu/emu_engine.h"
#include "satemu/errors.h"
#include "satemu/event_queue.h"

namespace satemu {
namespace {

using Clock = std::chrono::steady_clock;

class Socket {
 public:
  Socket() : fd_(::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0)) {
    if (fd_ < 0) {
      throw Error(ErrorCode::kBindFailure,
                  std::string("socket: ") + std::strerror(errno));
    }
  }
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }

 private:
  int fd_;
};

sockaddr_in Resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || !res) {
    throw Error(ErrorCode::kConfigError, "cannot resolve " + ep.host);
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

Endpoint ToEndpoint(const sockaddr_in& addr) {
  char buf[INET_ADDRSTRLEN] = {};
  ::inet_ntop(AF_INET, &addr.sin_addr, buf, sizeof(buf));
  return Endpoint{buf, ntohs(addr.sin_port)};
}

// What the receive context hands to the dispatch context.
struct Arrival {
  ScheduledPacket packet;
  std::vector<std::uint8_t> payload;
};

struct DispatchOutcome {
  std::uint64_t send_index = 0;
  std::uint64_t arrival_rank = 0;
  Nanoseconds actual_ns = 0;
  bool dropped = false;
  bool forward_failed = false;
};

// Ordered single-producer/single-consumer handoff.
class Handoff {
 public:
  void Push(Arrival a) {
    {
      std::lock_guard lock(mu_);
      items_.push_back(std::move(a));
    }
    cv_.notify_one();
  }

  void Close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_one();
  }

  // Moves everything pending into `out`. Returns false once closed and empty.
  template <typename Sink>
  bool Drain(Sink&& out) {
    std::deque<Arrival> taken;
    bool open;
    {
      std::lock_guard lock(mu_);
      taken.swap(items_);
      open = !closed_;
    }
    for (Arrival& a : taken) out(std::move(a));
    return open || !taken.empty();
  }

  // Blocks until something is pushed, the handoff closes, or `deadline`.
  void WaitUntil(Clock::time_point deadline) {
    std::unique_lock lock(mu_);
    cv_.wait_until(lock, deadline, [&] { return !items_.empty() || closed_; });
  }

  void Wait() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !items_.empty() || closed_; });
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Arrival> items_;
  bool closed_ = false;
};

}  // namespace

Endpoint Endpoint::Parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 ||
      colon + 1 == text.size()) {
    throw Error(ErrorCode::kConfigError,
                "endpoint must be host:port, got `" + std::string(text) + "`");
  }
  unsigned port = 0;
  const std::string_view port_text = text.substr(colon + 1);
  auto [ptr, ec] =
      std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() ||
      port > 65535) {
    throw Error(ErrorCode::kConfigError,
                "bad port in `" + std::string(text) + "`");
  }
  return Endpoint{std::string(text.substr(0, colon)),
                  static_cast<std::uint16_t>(port)};
}

std::string Endpoint::ToString() const {
  return host + ":" + std::to_string(port);
}

RawTrace SessionReport::ObservedTrace() const {
  RawTrace raw;
  raw.send_interval = send_interval;
  raw.entries.reserve(records.size());
  for (const RelayRecord& r : records) {
    const Nanoseconds held = r.actual_ns - r.receive_ns;
    raw.entries.push_back(r.dropped || r.forward_failed || held <= 0 ? kLost
                                                                     : held);
  }
  return raw;
}

std::string SessionReport::FormatMetrics() const {
  std::string out = "index,intended_ns,actual_ns,error_ns,dropped\n";
  for (const RelayRecord& r : records) {
    out += std::to_string(r.send_index) + "," + std::to_string(r.intended_ns) +
           "," + std::to_string(r.actual_ns) + "," +
           std::to_string(r.error_ns()) + "," + (r.dropped ? "1" : "0") + "\n";
  }
  return out;
}

SessionReport RelayRun(const RelayConfig& config) {
  if (config.delays.empty()) {
    throw Error(ErrorCode::kConfigError, "relay needs a non-empty delay table");
  }
  if (config.queue_capacity == 0) {
    throw Error(ErrorCode::kConfigError, "queue capacity must be positive");
  }
  LinkState state(config.delays, config.loss);

  const sockaddr_in listen_addr = Resolve(config.listen);
  const sockaddr_in forward_addr = Resolve(config.forward);

  Socket rx;
  Socket tx;
  if (::bind(rx.fd(), reinterpret_cast<const sockaddr*>(&listen_addr),
             sizeof(listen_addr)) != 0) {
    throw Error(ErrorCode::kBindFailure, config.listen.ToString() + ": " +
                                             std::strerror(errno));
  }
  sockaddr_in bound{};
  socklen_t bound_len = sizeof(bound);
  ::getsockname(rx.fd(), reinterpret_cast<sockaddr*>(&bound), &bound_len);
  if (config.on_listening) config.on_listening(ToEndpoint(bound));

  const Clock::time_point epoch = Clock::now();
  auto since_epoch = [epoch](Clock::time_point t) -> Nanoseconds {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(t - epoch)
        .count();
  };
  auto stop_requested = [&] {
    return config.stop && config.stop->load(std::memory_order_relaxed);
  };

  Handoff handoff;
  std::atomic<std::size_t> in_flight{0};
  std::vector<RelayRecord> received;  // owned by the receive context
  std::size_t overflows = 0;
  std::vector<DispatchOutcome> outcomes;  // owned by the dispatch context

  std::thread dispatcher([&] {
    EventQueue queue;
    std::unordered_map<std::uint64_t, std::vector<std::uint8_t>> payloads;
    std::uint64_t rank = 0;
    bool open = true;
    auto absorb = [&](Arrival a) {
      payloads.emplace(a.packet.payload_ref, std::move(a.payload));
      queue.Push(a.packet);
    };

    while (true) {
      open = handoff.Drain(absorb);
      if (queue.empty()) {
        if (!open) break;
        handoff.Wait();
        continue;
      }

      const Clock::time_point due =
          epoch + std::chrono::nanoseconds(queue.Top().departure_time);
      if (Clock::now() + config.spin_window < due) {
        // A new arrival may carry an earlier departure, so wake on pushes.
        handoff.WaitUntil(due - config.spin_window);
        continue;
      }
      while (Clock::now() < due) std::this_thread::yield();

      const ScheduledPacket packet = queue.Pop();
      DispatchOutcome out;
      out.send_index = packet.send_index;
      out.arrival_rank = rank++;
      if (IngressDecide(state) == Verdict::kDrop) {
        out.dropped = true;
        out.actual_ns = since_epoch(Clock::now());
      } else {
        const auto& payload = payloads[packet.payload_ref];
        out.actual_ns = since_epoch(Clock::now());
        const ssize_t sent =
            ::sendto(tx.fd(), payload.data(), payload.size(), 0,
                     reinterpret_cast<const sockaddr*>(&forward_addr),
                     sizeof(forward_addr));
        out.forward_failed = sent < 0;
      }
      payloads.erase(packet.payload_ref);
      in_flight.fetch_sub(1, std::memory_order_relaxed);
      outcomes.push_back(out);
    }
  });

  // Receive context.
  {
    std::vector<std::uint8_t> buf(65536);
    std::uint64_t next_index = 0;
    Clock::time_point last_rx{};
    while (!stop_requested()) {
      if (config.max_packets != 0 && next_index >= config.max_packets) break;
      pollfd pfd{rx.fd(), POLLIN, 0};
      const int ready = ::poll(&pfd, 1, 20);
      if (ready < 0 && errno != EINTR) break;
      if (ready <= 0) {
        if (config.idle_timeout.count() > 0 && next_index > 0 &&
            Clock::now() - last_rx >= config.idle_timeout) {
          break;
        }
        continue;
      }
      const ssize_t n = ::recv(rx.fd(), buf.data(), buf.size(), 0);
      const Clock::time_point now = Clock::now();
      if (n < 0) continue;
      last_rx = now;

      if (in_flight.load(std::memory_order_relaxed) >= config.queue_capacity) {
        ++overflows;
        continue;
      }
      in_flight.fetch_add(1, std::memory_order_relaxed);

      RelayRecord rec;
      rec.send_index = next_index++;
      rec.size = static_cast<std::uint32_t>(n);
      rec.receive_ns = since_epoch(now);
      rec.imposed_delay_ns = static_cast<Nanoseconds>(state.TakeEgressDelay());
      rec.intended_ns = rec.receive_ns + rec.imposed_delay_ns;

      Arrival a;
      a.packet.send_index = rec.send_index;
      a.packet.enqueue_time = rec.receive_ns;
      a.packet.departure_time = rec.intended_ns;
      a.packet.payload_ref = rec.send_index;
      a.packet.size = rec.size;
      a.payload.assign(buf.begin(), buf.begin() + n);
      received.push_back(rec);
      handoff.Push(std::move(a));
    }
    handoff.Close();
  }
  dispatcher.join();

  SessionReport report;
  report.send_interval = config.send_interval;
  report.queue_overflows = overflows;
  report.egress_wraps = state.egress_wraps();
  report.ingress_wraps = state.ingress_wraps();
  report.records = std::move(received);
  for (const DispatchOutcome& out : outcomes) {
    RelayRecord& rec = report.records[out.send_index];
    rec.arrival_rank = out.arrival_rank;
    rec.actual_ns = out.actual_ns;
    rec.dropped = out.dropped;
    rec.forward_failed = out.forward_failed;
    if (out.dropped) {
      ++report.dropped;
    } else if (out.forward_failed) {
      ++report.forward_failures;
    } else {
      ++report.forwarded;
    }
  }
  return report;
}

}  // namespace satemu
