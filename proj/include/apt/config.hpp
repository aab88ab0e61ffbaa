#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "apt/probe.hpp"
#include "apt/synthgen.hpp"
#include "apt/trainer.hpp"

namespace apt {

using Json = nlohmann::ordered_json;

// Commands that take a JSON configuration: props, gen, pretrain, probe, report.
const std::vector<std::string>& command_names();

// Every key a command accepts, with its default value.
Json command_defaults(std::string_view command);

// defaults < file < overrides. `file` must be an object whose keys (at every
// nesting level) exist in the defaults; overrides are "dotted.key=value" with
// value parsed as JSON when possible and taken as a string otherwise.
// Throws Error{invalid_argument} on unknown keys or malformed overrides.
Json resolve_config(std::string_view command, const Json& file, const std::vector<std::string>& overrides);

struct RunConfig {
  TrainConfig train;
  std::vector<std::string> graphs;
  std::string out;
  std::string mode;  // "select" or a baseline mode name
  std::vector<std::string> order;
  bool selection_checkpoints = true;
};

RunConfig run_config_from_json(const Json& resolved);

struct GenConfig {
  std::string out;
  std::vector<std::size_t> n;
  std::vector<double> alpha;
  std::uint32_t d_min = 1;
  std::uint32_t d_max = 0;
  std::vector<std::uint64_t> seeds;
  bool lcc = false;
};

GenConfig gen_config_from_json(const Json& resolved);

struct ProbeRequest {
  std::string checkpoint, graph, labels, out;
  std::uint64_t embed_seed = 0;
  ProbeConfig probe;
};

ProbeRequest probe_request_from_json(const Json& resolved);

}  // namespace apt
