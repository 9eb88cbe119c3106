#include "satemu/synth.h"

#include <random>

#include "satemu/errors.h"

namespace satemu {

RawTrace SynthTrace(const SynthParams& params) {
  if (params.length == 0) throw Error(ErrorCode::kInvalidParams, "length is 0");
  if (params.period == 0) throw Error(ErrorCode::kInvalidParams, "period is 0");
  if (params.levels.empty()) {
    throw Error(ErrorCode::kInvalidParams, "no delay levels");
  }
  for (Nanoseconds level : params.levels) {
    if (level <= 0) {
      throw Error(ErrorCode::kInvalidParams, "delay levels must be positive");
    }
  }
  if (params.jitter < 0) {
    throw Error(ErrorCode::kInvalidParams, "jitter must be non-negative");
  }
  if (!(params.loss_rate >= 0.0 && params.loss_rate < 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "loss rate must be in [0, 1)");
  }
  if (params.send_interval <= 0) {
    throw Error(ErrorCode::kInvalidParams, "send interval must be positive");
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<Nanoseconds> jitter(0, params.jitter);
  std::bernoulli_distribution lost(params.loss_rate);

  RawTrace raw;
  raw.send_interval = params.send_interval;
  raw.entries.reserve(params.length);
  bool floor_placed = false;
  for (std::size_t i = 0; i < params.length; ++i) {
    if (i % params.period == 0) floor_placed = false;
    const Nanoseconds base =
        params.levels[(i / params.period) % params.levels.size()];
    const Nanoseconds extra = jitter(rng);
    if (lost(rng)) {
      raw.entries.push_back(kLost);
    } else if (!floor_placed) {
      raw.entries.push_back(base);
      floor_placed = true;
    } else {
      raw.entries.push_back(base + extra);
    }
  }
  return raw;
}

}  // namespace satemu
