#ifndef SATEMU_TRACE_INGEST_H_
#define SATEMU_TRACE_INGEST_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "satemu/trace_model.h"

namespace satemu {

// ---------------------------------------------------------------------------
// irtt JSON output
// ---------------------------------------------------------------------------

struct IrttDiagnostics {
  std::int64_t first_seq = 0;
  std::size_t records = 0;
  std::size_t gap_filled = 0;  // sequence numbers with no record at all
  std::size_t duplicates = 0;  // later records for an already-seen seqno
  std::vector<std::int64_t> duplicate_seqs;
  std::size_t missing_rtt = 0;  // not marked lost but no rtt; counted lost
  // Raw loss-marker values as they appeared ("false", "true", "true_down",
  // "true_up", ...), with their counts.
  std::map<std::string, std::size_t> loss_markers;
  bool interval_from_document = false;
};

struct IrttParseResult {
  RawTrace trace;
  IrttDiagnostics diagnostics;
};

// Parses the JSON document written by `irtt client -o`. Uses the
// round_trips[].seqno, round_trips[].lost and round_trips[].delay.rtt fields.
// Any loss marker other than "false" counts as lost. Missing sequence numbers
// become losses; for duplicated sequence numbers the first record wins.
//
// The send interval comes from config.params.interval when present, falling
// back to `fallback_interval`.
//
// Throws kMalformedDocument or kNoRecords.
IrttParseResult ParseIrtt(std::string_view document,
                          std::optional<Nanoseconds> fallback_interval = {});
IrttParseResult ReadIrttFile(const std::filesystem::path& path,
                             std::optional<Nanoseconds> fallback_interval = {});

// ---------------------------------------------------------------------------
// Canonical delimited-text files
// ---------------------------------------------------------------------------
//
//   raw / delay trace:   index,delay_ns         then  <i>,<ns|-1>
//   send-order loss:     send_index,lost        then  <i>,<0|1>
//   arrival-order loss:  arrival_rank,lost      then  <k>,<0|1>
//
// Indices are consecutive from 0. Lines end in '\n'. The send interval is not
// stored and must be supplied by the reader.

inline constexpr std::string_view kTraceHeader = "index,delay_ns";
inline constexpr std::string_view kSendLossHeader = "send_index,lost";
inline constexpr std::string_view kArrivalLossHeader = "arrival_rank,lost";

std::string FormatCanonical(const RawTrace& raw);
RawTrace ParseCanonical(std::istream& in,
                        Nanoseconds send_interval = kDefaultSendInterval);

void WriteCanonical(const RawTrace& raw, const std::filesystem::path& path);
RawTrace ReadCanonical(const std::filesystem::path& path,
                       Nanoseconds send_interval = kDefaultSendInterval);

std::string FormatDelayTrace(const DelayTrace& delays);
DelayTrace ParseDelayTrace(std::istream& in);
void WriteDelayTrace(const DelayTrace& delays,
                     const std::filesystem::path& path);
DelayTrace ReadDelayTrace(const std::filesystem::path& path);

std::string FormatLossTrace(const LossTrace& loss);
// The header decides the indexing of the result.
LossTrace ParseLossTrace(std::istream& in);
void WriteLossTrace(const LossTrace& loss, const std::filesystem::path& path);
LossTrace ReadLossTrace(const std::filesystem::path& path);

// Writes `contents` to `path`, throwing kIoError on failure.
void WriteTextFile(const std::filesystem::path& path,
                   std::string_view contents);

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

inline constexpr Nanoseconds kDefaultChangeThreshold = 2 * kMillisecond;

struct DelaySummary {
  std::int64_t min = 0;
  double mean = 0.0;
  std::int64_t p50 = 0;
  std::int64_t p99 = 0;
  std::int64_t max = 0;
};

struct WindowMin {
  std::size_t start = 0;
  std::optional<std::int64_t> min;  // empty when the window is all losses
};

struct TraceStats {
  std::size_t count = 0;
  std::size_t loss_count = 0;
  double loss_rate = 0.0;
  std::optional<DelaySummary> delay;  // empty when every packet was lost
  std::vector<WindowMin> windowed_min_series;
  std::vector<std::size_t> change_points;  // window starts
  std::optional<std::size_t> estimated_period;
};

// Nearest-rank percentile over a sorted, non-empty sample:
// the value at rank ceil(p/100 * n), 1-based.
std::int64_t NearestRankPercentile(const std::vector<std::int64_t>& sorted,
                                   double p);

// Computes loss and delay statistics plus the windowed-minimum series.
// A change point is a window whose minimum differs from the previous
// non-empty window's minimum by more than `change_threshold`. The estimated
// period is the median spacing between consecutive change points and is only
// reported with at least three change points.
//
// Throws kEmptyTrace or kInvalidParams (window == 0).
TraceStats ComputeTraceStats(
    const RawTrace& raw, std::size_t window,
    Nanoseconds change_threshold = kDefaultChangeThreshold);

// key,value summary lines followed by nothing else.
std::string FormatTraceStats(const TraceStats& stats);
// window_start,min_delay_ns series; empty windows are written as -1.
std::string FormatWindowSeries(const TraceStats& stats);

}  // namespace satemu

#endif  // SATEMU_TRACE_INGEST_H_
