#include "satemu/trace_model.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "satemu/errors.h"

namespace satemu {

std::size_t LossTrace::loss_count() const {
  return static_cast<std::size_t>(
      std::count(flags.begin(), flags.end(), std::uint8_t{1}));
}

ArrivalPermutation ArrivalPermutation::inverse() const {
  ArrivalPermutation inv;
  inv.order.resize(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) inv.order[order[k]] = k;
  return inv;
}

bool ArrivalPermutation::is_valid() const {
  std::vector<bool> seen(order.size(), false);
  for (std::size_t idx : order) {
    if (idx >= order.size() || seen[idx]) return false;
    seen[idx] = true;
  }
  return true;
}

SplitResult SplitTrace(const RawTrace& raw) {
  if (raw.empty()) throw Error(ErrorCode::kEmptyTrace, "trace has no entries");

  std::int64_t first_delivered = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::int64_t t = raw.entries[i];
    if (!IsValidEntry(t)) {
      throw Error(ErrorCode::kInvalidEntry,
                  "entry " + std::to_string(i) + " has value " +
                      std::to_string(t));
    }
    if (first_delivered == 0 && t > 0) first_delivered = t;
  }
  if (first_delivered == 0) {
    throw Error(ErrorCode::kAllLost, "trace has no delivered packet");
  }

  SplitResult out;
  out.delays.delays.resize(raw.size());
  out.loss.flags.resize(raw.size());
  out.loss.indexing = LossIndexing::kSendOrder;

  std::int64_t carry = first_delivered;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::int64_t t = raw.entries[i];
    if (t > 0) {
      carry = t;
      out.loss.flags[i] = 0;
    } else {
      out.loss.flags[i] = 1;
    }
    out.delays.delays[i] = static_cast<std::uint64_t>(carry);
  }
  return out;
}

Nanoseconds ArrivalTime(std::size_t index, std::uint64_t delay,
                        Nanoseconds send_interval) {
  return static_cast<Nanoseconds>(index) * send_interval +
         static_cast<Nanoseconds>(delay);
}

ArrivalPermutation ComputeArrivalOrder(const DelayTrace& delays,
                                       Nanoseconds send_interval) {
  if (delays.empty()) throw Error(ErrorCode::kEmptyTrace, "no delays");
  if (send_interval <= 0) {
    throw Error(ErrorCode::kInvalidParams, "send interval must be positive");
  }

  std::vector<Nanoseconds> arrival(delays.size());
  for (std::size_t i = 0; i < delays.size(); ++i) {
    arrival[i] = ArrivalTime(i, delays.delays[i], send_interval);
  }

  ArrivalPermutation perm;
  perm.order.resize(delays.size());
  std::iota(perm.order.begin(), perm.order.end(), std::size_t{0});
  // Indices start ascending, so a stable sort yields the index tie-break.
  std::stable_sort(perm.order.begin(), perm.order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return arrival[a] < arrival[b];
                   });
  return perm;
}

LossTrace ReorderLoss(const LossTrace& loss, const ArrivalPermutation& perm) {
  if (loss.indexing != LossIndexing::kSendOrder) {
    throw Error(ErrorCode::kWrongIndexing,
                "loss trace is already keyed by arrival order");
  }
  if (loss.size() != perm.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "loss trace has " + std::to_string(loss.size()) +
                    " flags, permutation has " + std::to_string(perm.size()));
  }

  LossTrace out;
  out.indexing = LossIndexing::kArrivalOrder;
  out.flags.resize(loss.size());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    out.flags[k] = loss.flags[perm.order[k]];
  }
  return out;
}

RawTrace Reconstruct(const DelayTrace& delays, const LossTrace& loss,
                     Nanoseconds send_interval) {
  if (loss.indexing != LossIndexing::kSendOrder) {
    throw Error(ErrorCode::kWrongIndexing,
                "reconstruction needs a send-order loss trace");
  }
  if (delays.size() != loss.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "delay trace has " + std::to_string(delays.size()) +
                    " entries, loss trace has " + std::to_string(loss.size()));
  }

  RawTrace raw;
  raw.send_interval = send_interval;
  raw.entries.resize(delays.size());
  for (std::size_t i = 0; i < delays.size(); ++i) {
    raw.entries[i] = loss.flags[i] != 0
                         ? kLost
                         : static_cast<std::int64_t>(delays.delays[i]);
  }
  return raw;
}

TraceDiagnostics Validate(const RawTrace& raw) {
  TraceDiagnostics diag;
  diag.entries = raw.size();
  diag.interval_valid = raw.send_interval > 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::int64_t t = raw.entries[i];
    if (t == kLost) {
      ++diag.losses;
    } else if (t > 0) {
      diag.max_delay = std::max(diag.max_delay, t);
      if (static_cast<std::uint64_t>(t) > kMaxMapValue) diag.fits_32bit = false;
    } else {
      ++diag.invalid;
      diag.invalid_indices.push_back(i);
    }
  }
  return diag;
}

}  // namespace satemu
