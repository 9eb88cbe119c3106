#ifndef SATEMU_SYNTH_H_
#define SATEMU_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "satemu/trace_model.h"

namespace satemu {

// Piecewise-constant delay floor with bounded jitter and random losses, a
// stand-in for handover-driven LEO latency.
//
// Sample i belongs to segment i / period, whose floor is
// levels[segment % levels.size()]. Each delivered sample is floor + U[0,
// jitter]; the first delivered sample of a segment sits exactly on the floor.
// Each sample is lost independently with probability loss_rate.
struct SynthParams {
  std::size_t length = 0;
  std::size_t period = 1500;
  std::vector<Nanoseconds> levels;
  Nanoseconds jitter = 0;
  double loss_rate = 0.0;
  std::uint64_t seed = 1;
  Nanoseconds send_interval = kDefaultSendInterval;
};

// Deterministic for a given seed. Throws kInvalidParams.
RawTrace SynthTrace(const SynthParams& params);

}  // namespace satemu

#endif  // SATEMU_SYNTH_H_
