#include "apt/config.hpp"

#include <cstdint>

#include "apt/error.hpp"

namespace apt {

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"props", "gen", "pretrain", "probe", "report"};
  return names;
}

namespace {

Json pretrain_defaults() {
  const TrainConfig t;
  const auto& s = t.selection;
  Json j;
  j["graphs"] = Json::array();
  j["out"] = "run";
  j["seed"] = t.seed;
  j["threads"] = t.threads;
  j["mode"] = "select";
  j["variant"] = to_string(t.variant);
  j["order"] = Json::array();
  j["lambda"] = nullptr;
  j["reg_layers"] = t.reg_layers;
  j["batch_size"] = t.batch_size;
  j["tau"] = t.tau;
  j["fisher_batches"] = t.fisher_batches;
  j["track_M"] = t.track_M;
  j["divergence_limit"] = t.divergence_limit;
  j["selection_checkpoints"] = true;
  j["selection"] = {{"T_s", s.T_s},       {"T_g", s.T_g},         {"stop_threshold", s.stop_threshold},
                    {"F", s.F},           {"T", s.T},             {"warmup", s.warmup},
                    {"beta_c1", s.beta_c1}, {"beta_c2", s.beta_c2}, {"M", s.M},
                    {"pool_size", s.pool_size}};
  j["encoder"] = {{"hidden", t.encoder.hidden}, {"layers", t.encoder.layers}, {"d_emb", t.encoder.d_emb}};
  j["sampler"] = {{"restart_prob", t.sampler.restart_prob},
                  {"walk_steps", t.sampler.walk_steps},
                  {"max_nodes", t.sampler.max_nodes},
                  {"d_feat", t.sampler.d_feat}};
  j["optimizer"] = {{"kind", t.optimizer.kind},
                    {"lr", t.optimizer.lr},
                    {"beta1", t.optimizer.beta1},
                    {"beta2", t.optimizer.beta2},
                    {"eps", t.optimizer.eps}};
  return j;
}

Json probe_defaults() {
  const ProbeConfig p;
  Json j;
  j["checkpoint"] = "";
  j["graph"] = "";
  j["labels"] = "";
  j["out"] = "";
  j["seed"] = p.seed;
  j["embed_seed"] = 0;
  j["threads"] = p.threads;
  j["n_splits"] = p.n_splits;
  j["test_frac"] = p.test_frac;
  j["steps"] = p.steps;
  j["lr"] = p.lr;
  j["weight_decay"] = p.weight_decay;
  return j;
}

const char* type_name(const Json& j) { return j.type_name(); }

void check_against(const Json& defaults, const Json& value, const std::string& path) {
  if (defaults.is_null()) return;
  const bool ok = (defaults.is_object() && value.is_object()) || (defaults.is_array() && value.is_array()) ||
                  (defaults.is_string() && value.is_string()) || (defaults.is_boolean() && value.is_boolean()) ||
                  (defaults.is_number() && value.is_number());
  if (!ok)
    fail(Errc::invalid_argument, "config key '" + path + "' expects " + type_name(defaults) + ", got " +
                                     type_name(value));
  const bool non_negative_integer =
      value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0);
  if (defaults.is_number_integer() && !non_negative_integer)
    fail(Errc::invalid_argument, "config key '" + path + "' expects a non-negative integer");
  if (!defaults.is_object()) return;
  for (const auto& [key, v] : value.items()) {
    const auto sub = path.empty() ? key : path + "." + key;
    if (!defaults.contains(key)) fail(Errc::invalid_argument, "unknown config key '" + sub + "'");
    check_against(defaults.at(key), v, sub);
  }
}

void merge_into(Json& base, const Json& patch) {
  for (const auto& [key, v] : patch.items()) {
    if (v.is_object() && base.contains(key) && base[key].is_object()) {
      merge_into(base[key], v);
    } else {
      base[key] = v;
    }
  }
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_argument, std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

Json command_defaults(std::string_view command) {
  if (command == "props") return Json{{"graphs", Json::array()}, {"out", ""}};
  if (command == "gen")
    return Json{{"out", "graphs"}, {"n", Json::array({1000})},      {"alpha", Json::array({2.5})}, {"d_min", 1},
                {"d_max", 100},    {"seeds", Json::array({0})},     {"lcc", false}};
  if (command == "pretrain") return pretrain_defaults();
  if (command == "probe") return probe_defaults();
  if (command == "report") return Json{{"runlogs", Json::array()}, {"out", "report"}};
  fail(Errc::invalid_argument, "unknown command '" + std::string(command) + "'");
}

Json resolve_config(std::string_view command, const Json& file, const std::vector<std::string>& overrides) {
  const Json defaults = command_defaults(command);
  Json resolved = defaults;
  if (!file.is_null()) {
    if (!file.is_object()) fail(Errc::invalid_argument, "config file must hold a JSON object");
    check_against(defaults, file, "");
    merge_into(resolved, file);
  }
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(Errc::invalid_argument, "override '" + item + "' is not of the form key=value");
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    const Json* def = &defaults;
    Json* target = &resolved;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!def->is_object() || !def->contains(part)) fail(Errc::invalid_argument, "unknown config key '" + key + "'");
      def = &def->at(part);
      target = &(*target)[part];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    Json value;
    if (def->is_string()) {
      value = text;
    } else {
      value = Json::parse(text, nullptr, false);
      if (value.is_discarded()) value = text;
    }
    check_against(*def, value, key);
    *target = value;
  }
  return resolved;
}

RunConfig run_config_from_json(const Json& j) {
  check_against(pretrain_defaults(), j, "");
  RunConfig rc;
  TrainConfig& t = rc.train;
  rc.graphs = get<std::vector<std::string>>(j, "graphs");
  rc.out = get<std::string>(j, "out");
  rc.mode = get<std::string>(j, "mode");
  if (rc.mode != "select") baseline_from_string(rc.mode);
  rc.order = get<std::vector<std::string>>(j, "order");
  rc.selection_checkpoints = get<bool>(j, "selection_checkpoints");
  t.seed = get<std::uint64_t>(j, "seed");
  t.threads = get<std::size_t>(j, "threads");
  t.variant = variant_from_string(get<std::string>(j, "variant"));
  if (!j.at("lambda").is_null()) t.lambda = get<double>(j, "lambda");
  t.reg_layers = get<std::size_t>(j, "reg_layers");
  t.batch_size = get<std::size_t>(j, "batch_size");
  t.tau = get<double>(j, "tau");
  t.fisher_batches = get<std::size_t>(j, "fisher_batches");
  t.track_M = get<std::size_t>(j, "track_M");
  t.divergence_limit = get<double>(j, "divergence_limit");

  const Json& s = j.at("selection");
  t.selection.T_s = get<double>(s, "T_s");
  t.selection.T_g = get<double>(s, "T_g");
  t.selection.stop_threshold = get<double>(s, "stop_threshold");
  t.selection.F = get<std::size_t>(s, "F");
  t.selection.T = get<std::size_t>(s, "T");
  t.selection.warmup = get<std::size_t>(s, "warmup");
  t.selection.beta_c1 = get<double>(s, "beta_c1");
  t.selection.beta_c2 = get<double>(s, "beta_c2");
  t.selection.M = get<std::size_t>(s, "M");
  t.selection.pool_size = get<std::size_t>(s, "pool_size");

  const Json& sp = j.at("sampler");
  t.sampler.restart_prob = get<double>(sp, "restart_prob");
  t.sampler.walk_steps = get<std::size_t>(sp, "walk_steps");
  t.sampler.max_nodes = get<std::size_t>(sp, "max_nodes");
  t.sampler.d_feat = get<std::size_t>(sp, "d_feat");

  const Json& e = j.at("encoder");
  t.encoder.d_feat = t.sampler.d_feat;
  t.encoder.hidden = get<std::size_t>(e, "hidden");
  t.encoder.layers = get<std::size_t>(e, "layers");
  t.encoder.d_emb = get<std::size_t>(e, "d_emb");

  const Json& o = j.at("optimizer");
  t.optimizer.kind = get<std::string>(o, "kind");
  t.optimizer.lr = get<double>(o, "lr");
  t.optimizer.beta1 = get<double>(o, "beta1");
  t.optimizer.beta2 = get<double>(o, "beta2");
  t.optimizer.eps = get<double>(o, "eps");

  t.validate();
  return rc;
}

GenConfig gen_config_from_json(const Json& j) {
  check_against(command_defaults("gen"), j, "");
  GenConfig g;
  g.out = get<std::string>(j, "out");
  g.n = get<std::vector<std::size_t>>(j, "n");
  g.alpha = get<std::vector<double>>(j, "alpha");
  g.d_min = get<std::uint32_t>(j, "d_min");
  g.d_max = get<std::uint32_t>(j, "d_max");
  g.seeds = get<std::vector<std::uint64_t>>(j, "seeds");
  g.lcc = get<bool>(j, "lcc");
  require(!g.n.empty() && !g.alpha.empty() && !g.seeds.empty(), "gen: n, alpha and seeds must be non-empty");
  return g;
}

ProbeRequest probe_request_from_json(const Json& j) {
  check_against(probe_defaults(), j, "");
  ProbeRequest r;
  r.checkpoint = get<std::string>(j, "checkpoint");
  r.graph = get<std::string>(j, "graph");
  r.labels = get<std::string>(j, "labels");
  r.out = get<std::string>(j, "out");
  r.embed_seed = get<std::uint64_t>(j, "embed_seed");
  r.probe.seed = get<std::uint64_t>(j, "seed");
  r.probe.threads = get<std::size_t>(j, "threads");
  r.probe.n_splits = get<std::size_t>(j, "n_splits");
  r.probe.test_frac = get<double>(j, "test_frac");
  r.probe.steps = get<std::size_t>(j, "steps");
  r.probe.lr = get<double>(j, "lr");
  r.probe.weight_decay = get<double>(j, "weight_decay");
  require(!r.checkpoint.empty() && !r.graph.empty() && !r.labels.empty(),
          "probe: checkpoint, graph and labels are required");
  r.probe.validate();
  return r;
}

}  // namespace apt
