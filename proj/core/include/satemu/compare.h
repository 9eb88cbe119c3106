#ifndef SATEMU_COMPARE_H_
#define SATEMU_COMPARE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "satemu/trace_model.h"

namespace satemu {

inline constexpr Nanoseconds kDefaultTolerance = 2 * kMillisecond;

struct IndexedError {
  std::size_t index = 0;
  std::int64_t error_ns = 0;  // observed - original
};

struct ComparisonReport {
  std::size_t n_compared = 0;
  std::vector<IndexedError> delay_errors;  // indices delivered on both sides
  std::int64_t max_abs_error_ns = 0;
  std::int64_t min_error_ns = 0;
  std::int64_t max_error_ns = 0;
  std::int64_t p50_abs_error_ns = 0;
  std::int64_t p99_abs_error_ns = 0;
  std::vector<std::size_t> loss_mismatches;  // exactly one side lost
  Nanoseconds tolerance_ns = kDefaultTolerance;
  bool pass = false;
};

// Index-by-index comparison. Passes iff every |error| <= tolerance_ns and the
// loss positions agree exactly. Unequal lengths throw kLengthMismatch unless
// `truncate` is set, in which case the common prefix is compared.
ComparisonReport Compare(const RawTrace& original, const RawTrace& observed,
                         Nanoseconds tolerance_ns = kDefaultTolerance,
                         bool truncate = false);

// key,value summary lines.
std::string FormatComparisonReport(const ComparisonReport& report);

// index,original_ns,observed_ns over the common prefix, -1 for losses.
std::string FormatPlotSeries(const RawTrace& original, const RawTrace& observed);

}  // namespace satemu

#endif  // SATEMU_COMPARE_H_
