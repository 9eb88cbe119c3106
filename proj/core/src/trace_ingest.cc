#include "satemu/trace_ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "satemu/errors.h"

namespace satemu {
namespace {

using nlohmann::json;

std::string ReadWholeFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed: " + path.string());
  return buf.str();
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return in;
}

std::optional<std::int64_t> IntField(const json& obj, const char* key) {
  if (!obj.is_object()) return std::nullopt;
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) return std::nullopt;
  return it->get<std::int64_t>();
}

// irtt writes `lost` as one of "false", "true", "true_down", "true_up".
// Older or hand-written documents may carry a JSON boolean.
std::string LossMarker(const json& record) {
  auto it = record.find("lost");
  if (it == record.end() || it->is_null()) return "false";
  if (it->is_boolean()) return it->get<bool>() ? "true" : "false";
  if (it->is_string()) return it->get<std::string>();
  throw Error(ErrorCode::kMalformedDocument, "unrecognised `lost` field");
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool ParseNumber(std::string_view text, T& out) {
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

// Shared reader for every `<index>,<value>` file. Calls `on_value` with each
// value column; returns the trimmed header.
template <typename OnValue>
std::string ReadIndexedColumns(std::istream& in, OnValue on_value) {
  std::string line;
  std::size_t line_no = 0;
  std::string header;
  bool have_header = false;
  std::size_t expected_index = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = Trim(line);
    if (text.empty()) continue;
    if (!have_header) {
      header = std::string(text);
      have_header = true;
      continue;
    }
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError(line_no, "expected `<index>,<value>`");
    }
    std::uint64_t index = 0;
    if (!ParseNumber(Trim(text.substr(0, comma)), index)) {
      throw ParseError(line_no, "bad index");
    }
    if (index != expected_index) {
      throw ParseError(line_no, "index " + std::to_string(index) +
                                    " out of sequence, expected " +
                                    std::to_string(expected_index));
    }
    std::int64_t value = 0;
    if (!ParseNumber(Trim(text.substr(comma + 1)), value)) {
      throw ParseError(line_no, "bad value");
    }
    on_value(line_no, value);
    ++expected_index;
  }
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed");
  if (!have_header) throw ParseError(line_no, "missing header");
  return header;
}

void ExpectHeader(const std::string& got, std::string_view want) {
  if (got != want) {
    throw ParseError(1, "expected header `" + std::string(want) + "`, got `" +
                            got + "`");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// irtt
// ---------------------------------------------------------------------------

IrttParseResult ParseIrtt(std::string_view document,
                          std::optional<Nanoseconds> fallback_interval) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kMalformedDocument, "top level is not an object");
  }
  auto trips = doc.find("round_trips");
  if (trips == doc.end() || !trips->is_array()) {
    throw Error(ErrorCode::kMalformedDocument, "no round_trips array");
  }
  if (trips->empty()) throw Error(ErrorCode::kNoRecords, "round_trips is empty");

  IrttParseResult result;
  IrttDiagnostics& diag = result.diagnostics;

  std::optional<Nanoseconds> interval;
  if (auto cfg = doc.find("config"); cfg != doc.end() && cfg->is_object()) {
    if (auto params = cfg->find("params"); params != cfg->end()) {
      interval = IntField(*params, "interval");
    }
    if (!interval) interval = IntField(*cfg, "interval");
  }
  if (interval && *interval > 0) {
    diag.interval_from_document = true;
  } else {
    interval = fallback_interval;
  }
  if (!interval || *interval <= 0) {
    throw Error(ErrorCode::kMalformedDocument,
                "no send interval in document and none supplied");
  }
  result.trace.send_interval = *interval;

  // seqno -> entry, first occurrence wins.
  std::map<std::int64_t, std::int64_t> by_seq;
  for (const json& record : *trips) {
    if (!record.is_object()) {
      throw Error(ErrorCode::kMalformedDocument, "round trip is not an object");
    }
    const auto seq = IntField(record, "seqno");
    if (!seq || *seq < 0) {
      throw Error(ErrorCode::kMalformedDocument, "round trip without seqno");
    }
    ++diag.records;
    const std::string marker = LossMarker(record);
    ++diag.loss_markers[marker];

    std::int64_t entry = kLost;
    if (marker == "false") {
      std::optional<std::int64_t> rtt;
      if (auto delay = record.find("delay"); delay != record.end()) {
        rtt = IntField(*delay, "rtt");
      }
      if (!rtt) {
        ++diag.missing_rtt;
      } else if (*rtt <= 0) {
        throw Error(ErrorCode::kMalformedDocument,
                    "seqno " + std::to_string(*seq) + " has non-positive rtt");
      } else {
        entry = *rtt;
      }
    }

    if (!by_seq.emplace(*seq, entry).second) {
      ++diag.duplicates;
      diag.duplicate_seqs.push_back(*seq);
    }
  }

  diag.first_seq = by_seq.begin()->first;
  const std::int64_t last_seq = by_seq.rbegin()->first;
  result.trace.entries.assign(
      static_cast<std::size_t>(last_seq - diag.first_seq + 1), kLost);
  for (const auto& [seq, entry] : by_seq) {
    result.trace.entries[static_cast<std::size_t>(seq - diag.first_seq)] =
        entry;
  }
  diag.gap_filled = result.trace.entries.size() - by_seq.size();
  return result;
}

IrttParseResult ReadIrttFile(const std::filesystem::path& path,
                             std::optional<Nanoseconds> fallback_interval) {
  return ParseIrtt(ReadWholeFile(path), fallback_interval);
}

// ---------------------------------------------------------------------------
// Canonical files
// ---------------------------------------------------------------------------

void WriteTextFile(const std::filesystem::path& path,
                   std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot create " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

std::string FormatCanonical(const RawTrace& raw) {
  std::string out;
  out.reserve(16 + raw.size() * 14);
  out.append(kTraceHeader).push_back('\n');
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.append(std::to_string(i)).push_back(',');
    out.append(std::to_string(raw.entries[i])).push_back('\n');
  }
  return out;
}

RawTrace ParseCanonical(std::istream& in, Nanoseconds send_interval) {
  RawTrace raw;
  raw.send_interval = send_interval;
  const std::string header =
      ReadIndexedColumns(in, [&](std::size_t line, std::int64_t value) {
        if (!IsValidEntry(value)) {
          throw ParseError(line, "delay must be positive or -1");
        }
        raw.entries.push_back(value);
      });
  ExpectHeader(header, kTraceHeader);
  return raw;
}

void WriteCanonical(const RawTrace& raw, const std::filesystem::path& path) {
  WriteTextFile(path, FormatCanonical(raw));
}

RawTrace ReadCanonical(const std::filesystem::path& path,
                       Nanoseconds send_interval) {
  auto in = OpenForRead(path);
  return ParseCanonical(in, send_interval);
}

std::string FormatDelayTrace(const DelayTrace& delays) {
  std::string out;
  out.append(kTraceHeader).push_back('\n');
  for (std::size_t i = 0; i < delays.size(); ++i) {
    out.append(std::to_string(i)).push_back(',');
    out.append(std::to_string(delays.delays[i])).push_back('\n');
  }
  return out;
}

DelayTrace ParseDelayTrace(std::istream& in) {
  DelayTrace delays;
  const std::string header =
      ReadIndexedColumns(in, [&](std::size_t line, std::int64_t value) {
        if (value <= 0) throw ParseError(line, "delay must be positive");
        delays.delays.push_back(static_cast<std::uint64_t>(value));
      });
  ExpectHeader(header, kTraceHeader);
  return delays;
}

void WriteDelayTrace(const DelayTrace& delays,
                     const std::filesystem::path& path) {
  WriteTextFile(path, FormatDelayTrace(delays));
}

DelayTrace ReadDelayTrace(const std::filesystem::path& path) {
  auto in = OpenForRead(path);
  return ParseDelayTrace(in);
}

std::string FormatLossTrace(const LossTrace& loss) {
  std::string out;
  out.append(loss.indexing == LossIndexing::kSendOrder ? kSendLossHeader
                                                       : kArrivalLossHeader)
      .push_back('\n');
  for (std::size_t i = 0; i < loss.size(); ++i) {
    out.append(std::to_string(i)).push_back(',');
    out.push_back(loss.flags[i] != 0 ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

LossTrace ParseLossTrace(std::istream& in) {
  LossTrace loss;
  const std::string header =
      ReadIndexedColumns(in, [&](std::size_t line, std::int64_t value) {
        if (value != 0 && value != 1) throw ParseError(line, "flag must be 0 or 1");
        loss.flags.push_back(static_cast<std::uint8_t>(value));
      });
  if (header == kSendLossHeader) {
    loss.indexing = LossIndexing::kSendOrder;
  } else if (header == kArrivalLossHeader) {
    loss.indexing = LossIndexing::kArrivalOrder;
  } else {
    throw ParseError(1, "unknown loss header `" + header + "`");
  }
  return loss;
}

void WriteLossTrace(const LossTrace& loss, const std::filesystem::path& path) {
  WriteTextFile(path, FormatLossTrace(loss));
}

LossTrace ReadLossTrace(const std::filesystem::path& path) {
  auto in = OpenForRead(path);
  return ParseLossTrace(in);
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

std::int64_t NearestRankPercentile(const std::vector<std::int64_t>& sorted,
                                   double p) {
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

TraceStats ComputeTraceStats(const RawTrace& raw, std::size_t window,
                             Nanoseconds change_threshold) {
  if (raw.empty()) throw Error(ErrorCode::kEmptyTrace, "trace has no entries");
  if (window == 0) throw Error(ErrorCode::kInvalidParams, "window must be >= 1");

  TraceStats stats;
  stats.count = raw.size();

  std::vector<std::int64_t> delivered;
  delivered.reserve(raw.size());
  for (std::int64_t t : raw.entries) {
    if (t == kLost) {
      ++stats.loss_count;
    } else if (t > 0) {
      delivered.push_back(t);
    }
  }
  stats.loss_rate =
      static_cast<double>(stats.loss_count) / static_cast<double>(stats.count);

  if (!delivered.empty()) {
    DelaySummary d;
    long double sum = 0;
    for (std::int64_t t : delivered) sum += t;
    d.mean = static_cast<double>(sum / delivered.size());
    std::sort(delivered.begin(), delivered.end());
    d.min = delivered.front();
    d.max = delivered.back();
    d.p50 = NearestRankPercentile(delivered, 50.0);
    d.p99 = NearestRankPercentile(delivered, 99.0);
    stats.delay = d;
  }

  for (std::size_t start = 0; start < raw.size(); start += window) {
    WindowMin w{start, std::nullopt};
    const std::size_t end = std::min(raw.size(), start + window);
    for (std::size_t i = start; i < end; ++i) {
      const std::int64_t t = raw.entries[i];
      if (t > 0 && (!w.min || t < *w.min)) w.min = t;
    }
    stats.windowed_min_series.push_back(w);
  }

  std::optional<std::int64_t> previous;
  for (const WindowMin& w : stats.windowed_min_series) {
    if (!w.min) continue;
    if (previous && std::llabs(*w.min - *previous) > change_threshold) {
      stats.change_points.push_back(w.start);
    }
    previous = w.min;
  }

  if (stats.change_points.size() >= 3) {
    std::vector<std::size_t> gaps;
    for (std::size_t i = 1; i < stats.change_points.size(); ++i) {
      gaps.push_back(stats.change_points[i] - stats.change_points[i - 1]);
    }
    std::sort(gaps.begin(), gaps.end());
    // Lower median.
    stats.estimated_period = gaps[(gaps.size() - 1) / 2];
  }
  return stats;
}

std::string FormatTraceStats(const TraceStats& stats) {
  std::ostringstream out;
  out << "key,value\n";
  out << "count," << stats.count << "\n";
  out << "loss_count," << stats.loss_count << "\n";
  out << "loss_rate," << stats.loss_rate << "\n";
  if (stats.delay) {
    out << "min_ns," << stats.delay->min << "\n";
    out << "mean_ns," << static_cast<std::int64_t>(std::llround(stats.delay->mean))
        << "\n";
    out << "p50_ns," << stats.delay->p50 << "\n";
    out << "p99_ns," << stats.delay->p99 << "\n";
    out << "max_ns," << stats.delay->max << "\n";
  }
  out << "windows," << stats.windowed_min_series.size() << "\n";
  out << "change_points," << stats.change_points.size() << "\n";
  out << "estimated_period,";
  if (stats.estimated_period) out << *stats.estimated_period;
  out << "\n";
  return out.str();
}

std::string FormatWindowSeries(const TraceStats& stats) {
  std::string out = "window_start,min_delay_ns\n";
  for (const WindowMin& w : stats.windowed_min_series) {
    out += std::to_string(w.start) + "," + std::to_string(w.min.value_or(kLost)) +
           "\n";
  }
  return out;
}

}  // namespace satemu
