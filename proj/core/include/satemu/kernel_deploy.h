#ifndef SATEMU_KERNEL_DEPLOY_H_
#define SATEMU_KERNEL_DEPLOY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "satemu/trace_model.h"

namespace satemu {

// Names shared with the kernel data-plane programs. The attach scripts and
// the map-population scripts refer to these.
inline constexpr std::string_view kDelayMapName = "delay_map";
inline constexpr std::string_view kLossMapName = "loss_map";
inline constexpr std::string_view kDelayObject = "edt_delay_packet.o";
inline constexpr std::string_view kDelaySection = "delay_ebpf";
inline constexpr std::string_view kLossObject = "xdp_drop_packet.o";
inline constexpr std::string_view kLossSection = "loss_bpf";

// "b0 b1 b2 b3": the value's four bytes, least significant first, as
// space-separated decimals.
std::string EncodeU32(std::uint32_t value);
// Inverse of EncodeU32. Throws kParseError on anything else.
std::uint32_t DecodeU32(std::string_view bytes);

enum class MapKind { kDelay, kLoss };

struct MapEntry {
  std::uint32_t key = 0;
  std::uint32_t value = 0;
};

// Contents of one BPF array map, keys 0..trace_len-1.
struct MapImage {
  std::string name;
  MapKind kind = MapKind::kDelay;
  std::vector<MapEntry> entries;

  std::size_t trace_len() const { return entries.size(); }
  std::string key_bytes(std::size_t i) const { return EncodeU32(entries[i].key); }
  std::string value_bytes(std::size_t i) const {
    return EncodeU32(entries[i].value);
  }
};

// Keys are the positions in `values`. Throws kValueOverflow for any value
// above 2^32 - 1.
MapImage EncodeMapEntries(std::string name, MapKind kind,
                          std::span<const std::uint64_t> values);

// Delay maps are keyed by send order.
MapImage BuildDelayImage(const DelayTrace& delays,
                         std::string name = std::string(kDelayMapName));
// Loss maps are keyed by arrival rank; a send-order trace is refused with
// kWrongIndexing.
MapImage BuildLossImage(const LossTrace& loss,
                        std::string name = std::string(kLossMapName));

// "key <bytes> value <bytes>" per entry, one line each.
std::string FormatMapPayload(const MapImage& image);

struct MapId {
  std::uint32_t id = 0;
};
struct MapName {
  std::string name;
};
using MapTarget = std::variant<MapId, MapName>;

struct MapCommands {
  std::string script;      // POSIX sh
  std::string batch_file;  // bpftool batch input; empty unless batched
};

// Emits `sudo bpftool map update id <id> key .. value ..` per entry, in key
// order. A MapName target first resolves the id with `bpftool map show`.
// With `batch`, the update commands go to a bpftool batch file (one command
// per line) and the script runs it once; `batch_path` is the path the script
// uses for that file.
//
// Throws kEmptyImage.
MapCommands EmitMapCommands(const MapImage& image, const MapTarget& target,
                            bool batch = false,
                            std::string_view batch_path = {});

enum class Role { kSender, kReceiver };

// "sender" / "receiver"; throws kInvalidRole otherwise.
Role ParseRole(std::string_view text);
std::string_view ToString(Role role);

struct DeployScript {
  Role role = Role::kSender;
  std::string device;
  std::vector<std::string> comments;  // rendered as "# ..." before the commands
  std::vector<std::string> lines;     // the privileged commands, in order

  // "#!/bin/sh", "set -e", the comments, then `lines`.
  std::string Render() const;
};

// Sender: clsact qdisc, direct-action egress filter, fq root qdisc.
// Receiver: generic-mode XDP attach.
// Throws kInvalidRole or kConfigError (empty device/object/section).
DeployScript EmitDeployScript(Role role, std::string_view device,
                              std::string_view object_file,
                              std::string_view section);

// Undoes EmitDeployScript. Every command tolerates the hook being absent.
DeployScript EmitTeardownScript(Role role, std::string_view device);

}  // namespace satemu

#endif  // SATEMU_KERNEL_DEPLOY_H_
