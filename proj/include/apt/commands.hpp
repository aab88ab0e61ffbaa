#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "apt/config.hpp"

namespace apt {

// Result of a command: the resolved configuration, a machine-readable
// summary, optional text for stdout, and warnings for stderr. `failures`
// counts nonfatal per-item errors (props keeps going past unreadable files).
struct CommandResult {
  Json resolved;
  Json summary;
  std::string stdout_text;
  std::vector<std::string> warnings;
  std::size_t failures = 0;
};

// Runs one of command_names() on a resolved configuration.
CommandResult run_command(std::string_view command, const Json& resolved);

CommandResult cmd_props(const Json& resolved);
CommandResult cmd_gen(const Json& resolved);
CommandResult cmd_pretrain(const Json& resolved);
CommandResult cmd_probe(const Json& resolved);
CommandResult cmd_report(const Json& resolved);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// Writes dir/manifest.json listing each artifact (relative path, byte size,
// SHA-256), sorted by path.
void write_manifest(const std::filesystem::path& dir, std::vector<std::string> artifacts);

// Sampler settings recorded in a checkpoint's meta lines (defaults for absent keys).
SamplerParams sampler_from_meta(const CheckpointMeta& meta, std::size_t d_feat);

// Graph name used for a file: its stem.
std::string graph_label(const std::filesystem::path& path);

}  // namespace apt
