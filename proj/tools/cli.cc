#include "cli.h"

#include <sys/stat.h>

#include <atomic>
#include <cmath>
#include <csignal>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "satemu/compare.h"
#include "satemu/emu_engine.h"
#include "satemu/errors.h"
#include "satemu/kernel_deploy.h"
#include "satemu/relay.h"
#include "satemu/synth.h"
#include "satemu/trace_ingest.h"
#include "satemu/trace_model.h"

namespace satemu::cli {
namespace {

namespace fs = std::filesystem;

std::atomic<bool> g_stop{false};

extern "C" void HandleStopSignal(int) { g_stop.store(true); }

void MakeExecutable(const fs::path& path) {
  fs::permissions(path,
                  fs::perms::owner_exec | fs::perms::group_exec |
                      fs::perms::others_exec,
                  fs::perm_options::add);
}

std::vector<Nanoseconds> ParseLevelsMs(const std::string& text) {
  std::vector<Nanoseconds> levels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double ms = 0;
    try {
      ms = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw Error(ErrorCode::kInvalidParams, "bad delay level `" + item + "`");
    }
    levels.push_back(static_cast<Nanoseconds>(std::llround(ms * kMillisecond)));
  }
  return levels;
}

struct Options {
  // ingest
  std::string irtt;
  std::optional<Nanoseconds> ingest_interval;
  // shared
  std::string in;
  std::string out;
  Nanoseconds interval = kDefaultSendInterval;
  std::string delay;
  std::string loss_send;
  std::string loss_arrival;
  // maps
  std::string out_dir;
  bool batch = false;
  std::optional<std::uint32_t> delay_map_id;
  std::optional<std::uint32_t> loss_map_id;
  // deploy
  std::string role;
  std::string device;
  std::string obj;
  std::string sec;
  std::string teardown;
  // simulate
  bool wrap = false;
  std::optional<std::size_t> packets;
  // relay
  std::string listen;
  std::string forward;
  std::string report;
  std::string metrics;
  std::size_t count = 0;
  long idle_timeout_ms = 2000;
  std::size_t queue_capacity = 1 << 16;
  long spin_us = 2000;
  // compare
  std::string a;
  std::string b;
  Nanoseconds tolerance = kDefaultTolerance;
  bool truncate = false;
  bool strict = false;
  std::string plot;
  // stats
  std::size_t window = 100;
  Nanoseconds threshold = kDefaultChangeThreshold;
  std::string series;
  // synth
  std::size_t length = 0;
  std::size_t period = 1500;
  std::string levels;
  Nanoseconds jitter = 0;
  double loss_rate = 0.0;
  std::uint64_t seed = 1;
};

int CmdIngest(const Options& o, std::ostream& out) {
  const IrttParseResult parsed = ReadIrttFile(o.irtt, o.ingest_interval);
  WriteCanonical(parsed.trace, o.out);

  const IrttDiagnostics& d = parsed.diagnostics;
  const TraceDiagnostics v = Validate(parsed.trace);
  out << "entries " << v.entries << ", lost " << v.losses << ", records "
      << d.records << ", gap-filled " << d.gap_filled << ", duplicates "
      << d.duplicates << ", missing rtt " << d.missing_rtt << "\n";
  out << "interval_ns " << parsed.trace.send_interval
      << (d.interval_from_document ? " (from document)" : " (from flag)")
      << "\n";
  for (const auto& [marker, n] : d.loss_markers) {
    out << "lost=" << marker << ": " << n << "\n";
  }
  if (!v.fits_32bit) {
    out << "warning: max delay " << v.max_delay
        << " ns does not fit a 32-bit kernel map value\n";
  }
  return 0;
}

int CmdSplit(const Options& o, std::ostream& out) {
  const RawTrace raw = ReadCanonical(o.in, o.interval);
  const SplitResult split = SplitTrace(raw);
  const ArrivalPermutation perm =
      ComputeArrivalOrder(split.delays, raw.send_interval);
  const LossTrace arrival = ReorderLoss(split.loss, perm);
  WriteDelayTrace(split.delays, o.delay);
  WriteLossTrace(split.loss, o.loss_send);
  WriteLossTrace(arrival, o.loss_arrival);

  std::size_t displaced = 0;
  for (std::size_t k = 0; k < perm.size(); ++k) displaced += perm.order[k] != k;
  out << "split " << raw.size() << " packets, " << split.loss.loss_count()
      << " lost, " << displaced << " reordered at the receiver\n";
  return 0;
}

int CmdMaps(const Options& o, std::ostream& out) {
  const DelayTrace delays = ReadDelayTrace(o.delay);
  const LossTrace loss = ReadLossTrace(o.loss_arrival);
  if (delays.size() != loss.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "delay and loss files differ in length");
  }
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);

  struct Job {
    MapImage image;
    std::optional<std::uint32_t> id;
  };
  const Job jobs[] = {{BuildDelayImage(delays), o.delay_map_id},
                      {BuildLossImage(loss), o.loss_map_id}};
  for (const Job& job : jobs) {
    MapTarget target = job.id ? MapTarget{MapId{*job.id}}
                              : MapTarget{MapName{job.image.name}};
    const std::string batch_name = job.image.name + ".batch";
    const MapCommands cmds = EmitMapCommands(
        job.image, target, o.batch, "$(dirname \"$0\")/" + batch_name);
    WriteTextFile(dir / (job.image.name + ".payload"),
                  FormatMapPayload(job.image));
    const fs::path script = dir / (job.image.name + ".sh");
    WriteTextFile(script, cmds.script);
    MakeExecutable(script);
    if (o.batch) WriteTextFile(dir / batch_name, cmds.batch_file);
    out << job.image.name << ": " << job.image.trace_len() << " entries -> "
        << script.string() << "\n";
  }
  return 0;
}

int CmdDeploy(const Options& o, std::ostream& out) {
  const Role role = ParseRole(o.role);
  const DeployScript script = EmitDeployScript(role, o.device, o.obj, o.sec);
  WriteTextFile(o.out, script.Render());
  MakeExecutable(o.out);
  if (!o.teardown.empty()) {
    WriteTextFile(o.teardown, EmitTeardownScript(role, o.device).Render());
    MakeExecutable(o.teardown);
  }
  out << ToString(role) << " script for " << o.device << " -> " << o.out
      << "\n";
  return 0;
}

int CmdSimulate(const Options& o, std::ostream& out) {
  const DelayTrace delays = ReadDelayTrace(o.delay);
  const LossTrace loss = ReadLossTrace(o.loss_arrival);
  SimulateOptions opts;
  opts.wrap = o.wrap;
  opts.n_packets = o.packets;
  const ObservedTrace observed = Simulate(delays, loss, o.interval, opts);
  WriteCanonical(observed.ToRawTrace(), o.out);
  out << "simulated " << observed.entries.size() << " packets: "
      << observed.delivered << " delivered, " << observed.dropped
      << " dropped";
  if (o.wrap) {
    out << ", egress wraps " << observed.egress_wraps << ", ingress wraps "
        << observed.ingress_wraps;
  }
  out << "\n";
  return 0;
}

int CmdRelay(const Options& o, std::ostream& out) {
  RelayConfig config;
  config.listen = Endpoint::Parse(o.listen);
  config.forward = Endpoint::Parse(o.forward);
  config.delays = ReadDelayTrace(o.delay);
  config.loss = ReadLossTrace(o.loss_arrival);
  config.send_interval = o.interval;
  config.max_packets = o.count;
  config.idle_timeout = std::chrono::milliseconds(o.idle_timeout_ms);
  config.queue_capacity = o.queue_capacity;
  config.spin_window = std::chrono::microseconds(o.spin_us);
  g_stop.store(false);
  config.stop = &g_stop;
  config.on_listening = [&out](const Endpoint& ep) {
    out << "listening on " << ep.ToString() << "\n" << std::flush;
  };

  auto previous_int = std::signal(SIGINT, HandleStopSignal);
  auto previous_term = std::signal(SIGTERM, HandleStopSignal);
  SessionReport report;
  try {
    report = RelayRun(config);
  } catch (...) {
    std::signal(SIGINT, previous_int);
    std::signal(SIGTERM, previous_term);
    throw;
  }
  std::signal(SIGINT, previous_int);
  std::signal(SIGTERM, previous_term);

  WriteCanonical(report.ObservedTrace(), o.report);
  const std::string metrics =
      o.metrics.empty() ? o.report + ".metrics.csv" : o.metrics;
  WriteTextFile(metrics, report.FormatMetrics());
  out << "relayed " << report.records.size() << " datagrams: "
      << report.forwarded << " forwarded, " << report.dropped << " dropped, "
      << report.forward_failures << " forward failures, "
      << report.queue_overflows << " queue overflows, egress wraps "
      << report.egress_wraps << "\n";
  return 0;
}

int CmdCompare(const Options& o, std::ostream& out) {
  const RawTrace a = ReadCanonical(o.a, o.interval);
  const RawTrace b = ReadCanonical(o.b, o.interval);
  const ComparisonReport report = Compare(a, b, o.tolerance, o.truncate);
  WriteTextFile(o.report, FormatComparisonReport(report));
  if (!o.plot.empty()) WriteTextFile(o.plot, FormatPlotSeries(a, b));
  out << "compared " << report.n_compared << " packets: max |error| "
      << report.max_abs_error_ns << " ns, " << report.loss_mismatches.size()
      << " loss mismatches, verdict " << (report.pass ? "pass" : "fail")
      << "\n";
  return (o.strict && !report.pass) ? 3 : 0;
}

int CmdStats(const Options& o, std::ostream& out) {
  const RawTrace raw = ReadCanonical(o.in, o.interval);
  const TraceStats stats = ComputeTraceStats(raw, o.window, o.threshold);
  WriteTextFile(o.out, FormatTraceStats(stats));
  if (!o.series.empty()) WriteTextFile(o.series, FormatWindowSeries(stats));
  out << stats.count << " packets, loss rate " << stats.loss_rate
      << ", estimated period ";
  if (stats.estimated_period) {
    out << *stats.estimated_period << " samples";
  } else {
    out << "n/a";
  }
  out << "\n";
  return 0;
}

int CmdSynth(const Options& o, std::ostream& out) {
  SynthParams params;
  params.length = o.length;
  params.period = o.period;
  params.levels = ParseLevelsMs(o.levels);
  params.jitter = o.jitter;
  params.loss_rate = o.loss_rate;
  params.seed = o.seed;
  params.send_interval = o.interval;
  const RawTrace raw = SynthTrace(params);
  WriteCanonical(raw, o.out);
  out << "wrote " << raw.size() << " packets to " << o.out << "\n";
  return 0;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Trace-driven link emulation toolkit"};
  app.name("satemu");
  app.require_subcommand(1);
  Options o;

  auto* ingest = app.add_subcommand("ingest", "Convert irtt JSON to a trace");
  ingest->add_option("--irtt", o.irtt, "irtt JSON output")->required();
  ingest->add_option("--interval-ns", o.ingest_interval,
                     "Send interval if the document lacks one");
  ingest->add_option("--out", o.out, "Canonical trace file")->required();

  auto* split = app.add_subcommand("split", "Split a trace into delay and loss");
  split->add_option("--in", o.in)->required();
  split->add_option("--interval-ns", o.interval)->check(CLI::PositiveNumber);
  split->add_option("--delay", o.delay)->required();
  split->add_option("--loss-send", o.loss_send)->required();
  split->add_option("--loss-arrival", o.loss_arrival)->required();

  auto* maps = app.add_subcommand("maps", "Emit BPF map payloads and scripts");
  maps->add_option("--delay", o.delay)->required();
  maps->add_option("--loss-arrival", o.loss_arrival)->required();
  maps->add_option("--out-dir", o.out_dir)->required();
  maps->add_flag("--batch", o.batch, "Use one bpftool batch invocation");
  maps->add_option("--delay-map-id", o.delay_map_id,
                   "Known map id; otherwise resolved by name");
  maps->add_option("--loss-map-id", o.loss_map_id);

  auto* deploy = app.add_subcommand("deploy", "Emit an attach script");
  deploy->add_option("--role", o.role, "sender|receiver")->required();
  deploy->add_option("--device", o.device)->required();
  deploy->add_option("--obj", o.obj)->required();
  deploy->add_option("--sec", o.sec)->required();
  deploy->add_option("--out", o.out)->required();
  deploy->add_option("--teardown", o.teardown, "Also write a teardown script");

  auto* simulate = app.add_subcommand("simulate", "Virtual-clock replay");
  simulate->add_option("--delay", o.delay)->required();
  simulate->add_option("--loss-arrival", o.loss_arrival)->required();
  simulate->add_option("--interval-ns", o.interval)->check(CLI::PositiveNumber);
  simulate->add_flag("--wrap", o.wrap, "Allow cyclic replay");
  simulate->add_option("--packets", o.packets, "Packets to inject");
  simulate->add_option("--out", o.out)->required();

  auto* relay = app.add_subcommand("relay", "Real-time UDP relay");
  relay->add_option("--listen", o.listen, "addr:port")->required();
  relay->add_option("--forward", o.forward, "addr:port")->required();
  relay->add_option("--delay", o.delay)->required();
  relay->add_option("--loss-arrival", o.loss_arrival)->required();
  relay->add_option("--report", o.report, "Observed trace output")->required();
  relay->add_option("--metrics", o.metrics, "Per-packet timing output");
  relay->add_option("--interval-ns", o.interval)->check(CLI::PositiveNumber);
  relay->add_option("--count", o.count, "Stop after N datagrams (0: no limit)");
  relay->add_option("--idle-timeout-ms", o.idle_timeout_ms,
                    "Stop after this much silence (0: never)");
  relay->add_option("--queue-capacity", o.queue_capacity)
      ->check(CLI::PositiveNumber);
  relay->add_option("--spin-us", o.spin_us,
                    "Busy-wait this long before each departure")
      ->check(CLI::NonNegativeNumber);

  auto* compare = app.add_subcommand("compare", "Compare two traces");
  compare->add_option("--a", o.a, "Original trace")->required();
  compare->add_option("--b", o.b, "Observed trace")->required();
  compare->add_option("--tolerance-ns", o.tolerance);
  compare->add_flag("--truncate", o.truncate, "Compare the common prefix");
  compare->add_flag("--strict", o.strict, "Exit 3 on a failing verdict");
  compare->add_option("--report", o.report)->required();
  compare->add_option("--plot", o.plot, "index,original_ns,observed_ns");
  compare->add_option("--interval-ns", o.interval)->check(CLI::PositiveNumber);

  auto* stats = app.add_subcommand("stats", "Trace statistics");
  stats->add_option("--in", o.in)->required();
  stats->add_option("--window", o.window)->required()->check(CLI::PositiveNumber);
  stats->add_option("--out", o.out)->required();
  stats->add_option("--series", o.series, "Windowed minimum series output");
  stats->add_option("--threshold-ns", o.threshold);
  stats->add_option("--interval-ns", o.interval)->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic trace");
  synth->add_option("--length", o.length)->required();
  synth->add_option("--period", o.period)->required();
  synth->add_option("--levels", o.levels, "Floors in ms, comma separated")
      ->required();
  synth->add_option("--jitter-ns", o.jitter)->required();
  synth->add_option("--loss-rate", o.loss_rate)->required();
  synth->add_option("--seed", o.seed)->required();
  synth->add_option("--out", o.out)->required();
  synth->add_option("--interval-ns", o.interval)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (ingest->parsed()) return CmdIngest(o, out);
    if (split->parsed()) return CmdSplit(o, out);
    if (maps->parsed()) return CmdMaps(o, out);
    if (deploy->parsed()) return CmdDeploy(o, out);
    if (simulate->parsed()) return CmdSimulate(o, out);
    if (relay->parsed()) return CmdRelay(o, out);
    if (compare->parsed()) return CmdCompare(o, out);
    if (stats->parsed()) return CmdStats(o, out);
    if (synth->parsed()) return CmdSynth(o, out);
  } catch (const Error& e) {
    err << "satemu: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "satemu: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace satemu::cli
