// apt: command-line front end over the C library.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical divergence.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "apt/apt.h"

namespace {

using Json = nlohmann::ordered_json;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

int exit_code(apt_status s) {
  switch (s) {
    case APT_OK: return kOk;
    case APT_ERR_INVALID_ARGUMENT: return kUsage;
    case APT_ERR_NUMERICAL: return kNumerical;
    default: return kData;
  }
}

struct CString {
  char* p = nullptr;
  ~CString() { apt_string_free(p); }
  [[nodiscard]] std::string str() const { return p ? p : ""; }
};

Json defaults_for(const std::string& command) {
  CString out;
  if (apt_command_defaults(command.c_str(), &out.p) != APT_OK) return Json::object();
  return Json::parse(out.str());
}

void flatten(const Json& j, const std::string& prefix, std::ostringstream& os) {
  for (const auto& [key, v] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (v.is_object()) {
      flatten(v, name, os);
    } else {
      os << "  " << name << " = " << v.dump() << "\n";
    }
  }
}

std::string keys_footer(const std::string& command) {
  std::ostringstream os;
  os << "\nConfig keys (set with --config FILE or --set key=value; defaults shown):\n";
  flatten(defaults_for(command), "", os);
  return os.str();
}

std::string dflt(const Json& d, const std::string& key) {
  if (!d.contains(key)) return {};
  const auto& v = d.at(key);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

// Options shared by every subcommand; flags become overrides only when given.
struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, CLI::Option*>> scalars;  // config key, option
  std::vector<std::pair<std::string, CLI::Option*>> lists;

  [[nodiscard]] std::vector<std::string> flag_overrides() const {
    std::vector<std::string> out;
    for (const auto& [key, opt] : scalars) {
      if (opt->count() == 0) continue;
      out.push_back(key + "=" + (opt->get_type_name() == "FLAG" ? "true" : opt->as<std::string>()));
    }
    for (const auto& [key, opt] : lists) {
      if (opt->count() == 0) continue;
      Json arr = Json::array();
      for (const auto& s : opt->as<std::vector<std::string>>()) {
        const Json parsed = Json::parse(s, nullptr, false);
        const bool text = parsed.is_discarded() || key == "graphs" || key == "runlogs";
        arr.push_back(text ? Json(s) : parsed);
      }
      out.push_back(key + "=" + arr.dump());
    }
    return out;
  }
};

void flag(CLI::App* sub, Common& c, const std::string& name, const std::string& key, const std::string& help,
          const Json& defaults, const std::string& type = "VALUE") {
  auto* opt = sub->add_option(name, help)->type_name(type);
  const auto leaf = key.substr(key.rfind('.') + 1);
  const auto d = dflt(defaults, leaf);
  if (!d.empty()) opt->default_str(d);
  c.scalars.emplace_back(key, opt);
}

void switch_flag(CLI::App* sub, Common& c, const std::string& name, const std::string& key, const std::string& help) {
  c.scalars.emplace_back(key, sub->add_flag(name, help)->type_name("FLAG"));
}

void list_flag(CLI::App* sub, Common& c, const std::string& name, const std::string& key, const std::string& help,
               const Json& defaults) {
  auto* opt = sub->add_option(name, help)->expected(1, -1)->allow_extra_args(true)->type_name("LIST");
  const auto d = dflt(defaults, key);
  if (!d.empty() && d != "[]") opt->default_str(d);
  c.lists.emplace_back(key, opt);
}

int run(const std::string& command, const Common& c) {
  std::string file_text;
  if (!c.config.empty()) {
    std::ifstream in(c.config, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot read config file " << c.config << "\n";
      return kData;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    file_text = ss.str();
  }
  std::vector<std::string> overrides = c.sets;
  const auto flags = c.flag_overrides();
  overrides.insert(overrides.end(), flags.begin(), flags.end());
  std::vector<const char*> ov;
  for (const auto& s : overrides) ov.push_back(s.c_str());

  CString resolved;
  apt_status s = apt_command_resolve(command.c_str(), c.config.empty() ? nullptr : file_text.c_str(), ov.data(),
                                     ov.size(), &resolved.p);
  if (s != APT_OK) {
    std::cerr << "error: " << apt_last_error() << "\n";
    return s == APT_ERR_PARSE ? kUsage : exit_code(s);
  }
  std::cerr << "# resolved config\n" << resolved.str() << "\n";

  CString result;
  s = apt_command_run(command.c_str(), resolved.p, &result.p);
  if (s != APT_OK) {
    std::cerr << "error (" << apt_status_name(s) << "): " << apt_last_error() << "\n";
    return exit_code(s);
  }
  const Json r = Json::parse(result.str());
  for (const auto& w : r.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
  const auto text = r.at("stdout").get<std::string>();
  if (!text.empty()) {
    std::cout << text;
  } else {
    std::cout << r.at("summary").dump(2) << "\n";
  }
  return r.at("failures").get<std::size_t>() > 0 ? kData : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph pre-training with data-active selection of graphs and samples"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(apt_version()));

  std::map<std::string, Common> common;
  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"props", "Structural properties (raw and pool z-scores) of edge-list graphs, as JSON lines"},
      {"gen", "Generate power-law configuration-model graphs as edge-list files"},
      {"pretrain", "Pre-train the encoder with graph and sample selection (or a baseline schedule)"},
      {"probe", "Linear probe of frozen node embeddings against a label file"},
      {"report", "CSV tables (loss curves, selection order, forgetting) from RunLog files"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    Common& c = common[name];
    const Json d = defaults_for(name);
    sub->footer(keys_footer(name));
    sub->add_option("--config", c.config, "JSON config file (defaults < file < flags)");
    sub->add_option("--set", c.sets, "Override a config key, e.g. --set selection.T=50")->type_name("KEY=VALUE");
    if (d.contains("out")) flag(sub, c, "--out", "out", "Output directory", d);
    if (d.contains("threads")) flag(sub, c, "--threads", "threads", "Worker threads (1 = reproducible mode)", d);
    if (d.contains("seed")) flag(sub, c, "--seed", "seed", "Master seed", d);
    subs[name] = sub;
  }

  {
    auto* sub = subs["props"];
    list_flag(sub, common["props"], "graphs", "graphs", "Edge-list files", defaults_for("props"));
  }
  {
    auto* sub = subs["gen"];
    auto& c = common["gen"];
    const Json d = defaults_for("gen");
    list_flag(sub, c, "--n", "n", "Node counts", d);
    list_flag(sub, c, "--alpha", "alpha", "Target power-law exponents", d);
    list_flag(sub, c, "--seeds", "seeds", "Generator seeds", d);
    flag(sub, c, "--d-min", "d_min", "Minimum degree", d);
    flag(sub, c, "--d-max", "d_max", "Maximum degree", d);
    switch_flag(sub, c, "--lcc", "lcc", "Write only the largest connected component");
  }
  {
    auto* sub = subs["pretrain"];
    auto& c = common["pretrain"];
    const Json d = defaults_for("pretrain");
    list_flag(sub, c, "graphs", "graphs", "Pre-training edge-list files", d);
    flag(sub, c, "--variant", "variant", "apt, apt-l2, apt-r, apt-g or apt-p", d);
    flag(sub, c, "--mode", "mode", "select, all_graphs_uniform, random_order or reverse_order", d);
    flag(sub, c, "--iterations", "selection.T", "Iteration budget T", d.at("selection"));
    flag(sub, c, "--lambda", "lambda", "Proximal strength (default depends on the variant)", d);
  }
  {
    auto* sub = subs["probe"];
    auto& c = common["probe"];
    const Json d = defaults_for("probe");
    flag(sub, c, "--checkpoint", "checkpoint", "Encoder checkpoint", d);
    flag(sub, c, "--graph", "graph", "Evaluation edge-list file", d);
    flag(sub, c, "--labels", "labels", "Label file: 'node_id label' per line", d);
    flag(sub, c, "--splits", "n_splits", "Random train/test splits", d);
    flag(sub, c, "--test-frac", "test_frac", "Held-out fraction per split", d);
  }
  {
    auto* sub = subs["report"];
    list_flag(sub, common["report"], "runlogs", "runlogs", "runlog.jsonl files", defaults_for("report"));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) return run(name, common[name]);
  return kUsage;
}
