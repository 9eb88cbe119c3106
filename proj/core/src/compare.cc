#include "satemu/compare.h"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "satemu/errors.h"
#include "satemu/trace_ingest.h"

namespace satemu {

ComparisonReport Compare(const RawTrace& original, const RawTrace& observed,
                         Nanoseconds tolerance_ns, bool truncate) {
  if (original.size() != observed.size() && !truncate) {
    throw Error(ErrorCode::kLengthMismatch,
                "traces have " + std::to_string(original.size()) + " and " +
                    std::to_string(observed.size()) + " entries");
  }
  ComparisonReport report;
  report.tolerance_ns = tolerance_ns;
  report.n_compared = std::min(original.size(), observed.size());

  std::vector<std::int64_t> abs_errors;
  for (std::size_t i = 0; i < report.n_compared; ++i) {
    const bool lost_a = original.entries[i] == kLost;
    const bool lost_b = observed.entries[i] == kLost;
    if (lost_a != lost_b) {
      report.loss_mismatches.push_back(i);
    } else if (!lost_a) {
      const std::int64_t err = observed.entries[i] - original.entries[i];
      report.delay_errors.push_back({i, err});
      abs_errors.push_back(std::llabs(err));
    }
  }

  if (!abs_errors.empty()) {
    const auto [lo, hi] = std::minmax_element(
        report.delay_errors.begin(), report.delay_errors.end(),
        [](const IndexedError& a, const IndexedError& b) {
          return a.error_ns < b.error_ns;
        });
    report.min_error_ns = lo->error_ns;
    report.max_error_ns = hi->error_ns;
    std::sort(abs_errors.begin(), abs_errors.end());
    report.max_abs_error_ns = abs_errors.back();
    report.p50_abs_error_ns = NearestRankPercentile(abs_errors, 50.0);
    report.p99_abs_error_ns = NearestRankPercentile(abs_errors, 99.0);
  }
  report.pass = report.max_abs_error_ns <= tolerance_ns &&
                report.loss_mismatches.empty();
  return report;
}

std::string FormatComparisonReport(const ComparisonReport& report) {
  std::ostringstream out;
  out << "key,value\n";
  out << "n_compared," << report.n_compared << "\n";
  out << "delay_compared," << report.delay_errors.size() << "\n";
  out << "max_abs_error_ns," << report.max_abs_error_ns << "\n";
  out << "min_error_ns," << report.min_error_ns << "\n";
  out << "max_error_ns," << report.max_error_ns << "\n";
  out << "p50_abs_error_ns," << report.p50_abs_error_ns << "\n";
  out << "p99_abs_error_ns," << report.p99_abs_error_ns << "\n";
  out << "loss_mismatches," << report.loss_mismatches.size() << "\n";
  out << "loss_mismatch_indices,";
  for (std::size_t i = 0; i < report.loss_mismatches.size(); ++i) {
    if (i > 0) out << ';';
    out << report.loss_mismatches[i];
  }
  out << "\n";
  out << "tolerance_ns," << report.tolerance_ns << "\n";
  out << "verdict," << (report.pass ? "pass" : "fail") << "\n";
  return out.str();
}

std::string FormatPlotSeries(const RawTrace& original,
                             const RawTrace& observed) {
  std::string out = "index,original_ns,observed_ns\n";
  const std::size_t n = std::min(original.size(), observed.size());
  for (std::size_t i = 0; i < n; ++i) {
    out += std::to_string(i) + "," + std::to_string(original.entries[i]) + "," +
           std::to_string(observed.entries[i]) + "\n";
  }
  return out;
}

}  // namespace satemu
