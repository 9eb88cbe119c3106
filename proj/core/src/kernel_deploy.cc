#include "satemu/kernel_deploy.h"

#include <charconv>

#include "satemu/errors.h"

namespace satemu {
namespace {

std::string MapUpdate(std::string_view id, const MapImage& image,
                      std::size_t i) {
  return "map update id " + std::string(id) + " key " + image.key_bytes(i) +
         " value " + image.value_bytes(i);
}

std::string CompileHint(std::string_view object_file) {
  std::string source(object_file);
  if (source.size() > 2 && source.ends_with(".o")) {
    source.replace(source.size() - 2, 2, ".c");
  } else {
    source += ".c";
  }
  return "build: clang -O2 -g -target bpf -c " + source + " -o " +
         std::string(object_file);
}

void RequireNonEmpty(std::string_view value, const char* what) {
  if (value.empty()) {
    throw Error(ErrorCode::kConfigError, std::string(what) + " is empty");
  }
}

}  // namespace

std::string EncodeU32(std::uint32_t value) {
  std::string out;
  for (int byte = 0; byte < 4; ++byte) {
    if (byte > 0) out.push_back(' ');
    out += std::to_string((value >> (8 * byte)) & 0xFFu);
  }
  return out;
}

std::uint32_t DecodeU32(std::string_view bytes) {
  std::uint32_t value = 0;
  std::size_t pos = 0;
  for (int byte = 0; byte < 4; ++byte) {
    if (byte > 0) {
      if (pos >= bytes.size() || bytes[pos] != ' ') {
        throw Error(ErrorCode::kParseError, "expected 4 space-separated bytes");
      }
      ++pos;
    }
    unsigned part = 0;
    auto [ptr, ec] =
        std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), part);
    if (ec != std::errc() || part > 0xFF) {
      throw Error(ErrorCode::kParseError,
                  "bad byte in `" + std::string(bytes) + "`");
    }
    pos = static_cast<std::size_t>(ptr - bytes.data());
    value |= static_cast<std::uint32_t>(part) << (8 * byte);
  }
  if (pos != bytes.size()) {
    throw Error(ErrorCode::kParseError, "trailing input after 4 bytes");
  }
  return value;
}

MapImage EncodeMapEntries(std::string name, MapKind kind,
                          std::span<const std::uint64_t> values) {
  MapImage image;
  image.name = std::move(name);
  image.kind = kind;
  image.entries.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > kMaxMapValue) {
      throw Error(ErrorCode::kValueOverflow,
                  "value " + std::to_string(values[i]) + " at key " +
                      std::to_string(i) + " exceeds 32 bits");
    }
    image.entries.push_back(MapEntry{static_cast<std::uint32_t>(i),
                                     static_cast<std::uint32_t>(values[i])});
  }
  return image;
}

MapImage BuildDelayImage(const DelayTrace& delays, std::string name) {
  return EncodeMapEntries(std::move(name), MapKind::kDelay, delays.delays);
}

MapImage BuildLossImage(const LossTrace& loss, std::string name) {
  if (loss.indexing != LossIndexing::kArrivalOrder) {
    throw Error(ErrorCode::kWrongIndexing,
                "loss map must be loaded in arrival order; reorder it first");
  }
  std::vector<std::uint64_t> values(loss.flags.begin(), loss.flags.end());
  return EncodeMapEntries(std::move(name), MapKind::kLoss, values);
}

std::string FormatMapPayload(const MapImage& image) {
  std::string out;
  for (std::size_t i = 0; i < image.trace_len(); ++i) {
    out += "key " + image.key_bytes(i) + " value " + image.value_bytes(i) + "\n";
  }
  return out;
}

MapCommands EmitMapCommands(const MapImage& image, const MapTarget& target,
                            bool batch, std::string_view batch_path) {
  if (image.entries.empty()) {
    throw Error(ErrorCode::kEmptyImage, "map `" + image.name + "` is empty");
  }

  MapCommands out;
  out.script = "#!/bin/sh\nset -e\n";

  std::string id;
  bool by_name = false;
  if (const auto* map_id = std::get_if<MapId>(&target)) {
    id = std::to_string(map_id->id);
  } else {
    const std::string& name = std::get<MapName>(target).name;
    RequireNonEmpty(name, "map name");
    by_name = true;
    out.script += "MAP_ID=$(sudo bpftool map show name " + name +
                  " | sed -n 's/^\\([0-9][0-9]*\\):.*/\\1/p' | head -n 1)\n";
    out.script += "[ -n \"$MAP_ID\" ] || { echo \"map " + name +
                  " not loaded\" >&2; exit 1; }\n";
    id = "$MAP_ID";
  }

  if (!batch) {
    for (std::size_t i = 0; i < image.trace_len(); ++i) {
      out.script += "sudo bpftool " + MapUpdate(id, image, i) + "\n";
    }
    return out;
  }

  const std::string path =
      batch_path.empty() ? image.name + ".batch" : std::string(batch_path);
  // The batch file cannot expand shell variables, so name-resolved targets
  // carry a placeholder that the script substitutes.
  const std::string file_id = by_name ? "@MAP_ID@" : id;
  for (std::size_t i = 0; i < image.trace_len(); ++i) {
    out.batch_file += MapUpdate(file_id, image, i) + "\n";
  }
  if (by_name) {
    out.script += "sed \"s/@MAP_ID@/$MAP_ID/\" \"" + path +
                  "\" | sudo bpftool batch file -\n";
  } else {
    out.script += "sudo bpftool batch file \"" + path + "\"\n";
  }
  return out;
}

Role ParseRole(std::string_view text) {
  if (text == "sender") return Role::kSender;
  if (text == "receiver") return Role::kReceiver;
  throw Error(ErrorCode::kInvalidRole,
              "role must be sender or receiver, got `" + std::string(text) + "`");
}

std::string_view ToString(Role role) {
  switch (role) {
    case Role::kSender: return "sender";
    case Role::kReceiver: return "receiver";
  }
  throw Error(ErrorCode::kInvalidRole, "unknown role value");
}

std::string DeployScript::Render() const {
  std::string out = "#!/bin/sh\nset -e\n";
  for (const std::string& c : comments) out += "# " + c + "\n";
  for (const std::string& line : lines) out += line + "\n";
  return out;
}

DeployScript EmitDeployScript(Role role, std::string_view device,
                              std::string_view object_file,
                              std::string_view section) {
  RequireNonEmpty(device, "device");
  RequireNonEmpty(object_file, "object file");
  RequireNonEmpty(section, "section");

  DeployScript script;
  script.role = role;
  script.device = std::string(device);
  const std::string dev(device);
  const std::string obj(object_file);
  const std::string sec(section);

  switch (role) {
    case Role::kSender:
      script.comments.push_back("sender: EDT delay on egress of " + dev);
      script.comments.push_back(CompileHint(object_file));
      script.lines = {
          "sudo tc qdisc add dev " + dev + " clsact",
          "sudo tc filter add dev " + dev + " egress bpf direct-action obj " +
              obj + " sec " + sec,
          "sudo tc qdisc add dev " + dev + " root fq",
      };
      return script;
    case Role::kReceiver:
      script.comments.push_back("receiver: XDP loss on ingress of " + dev);
      script.comments.push_back(CompileHint(object_file));
      script.lines = {
          "sudo ip link set dev " + dev + " xdpgeneric obj " + obj + " sec " +
              sec,
      };
      return script;
  }
  throw Error(ErrorCode::kInvalidRole, "unknown role value");
}

DeployScript EmitTeardownScript(Role role, std::string_view device) {
  RequireNonEmpty(device, "device");
  DeployScript script;
  script.role = role;
  script.device = std::string(device);
  const std::string dev(device);

  switch (role) {
    case Role::kSender:
      script.comments.push_back("sender teardown for " + dev);
      script.lines = {
          "sudo tc qdisc del dev " + dev + " root 2>/dev/null || true",
          "sudo tc qdisc del dev " + dev + " clsact 2>/dev/null || true",
      };
      return script;
    case Role::kReceiver:
      script.comments.push_back("receiver teardown for " + dev);
      script.lines = {
          "sudo ip link set dev " + dev + " xdpgeneric off",
      };
      return script;
  }
  throw Error(ErrorCode::kInvalidRole, "unknown role value");
}

}  // namespace satemu
