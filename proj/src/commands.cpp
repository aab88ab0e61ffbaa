#include "apt/commands.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "apt/error.hpp"
#include "apt/properties.hpp"

namespace apt {

namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  std::array<char, 32> buf{};
  const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), p);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(Errc::io, "write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::io, "cannot create directory " + dir.string() + ": " + ec.message());
}

Json stats_json(const GraphStats& s, bool with_z) {
  Json j;
  j["entropy"] = s.entropy;
  j["density"] = s.density;
  j["avg_degree"] = s.avg_degree;
  j["degree_variance"] = s.degree_variance;
  j["alpha"] = s.alpha;
  auto z = [&](double v) { return with_z ? Json(v) : Json(nullptr); };
  j["z_entropy"] = z(s.z_entropy);
  j["z_density"] = z(s.z_density);
  j["z_avg_degree"] = z(s.z_avg_degree);
  j["z_degree_variance"] = z(s.z_degree_variance);
  j["z_alpha"] = z(s.z_alpha);
  j["property_score"] = with_z ? Json(property_score(s)) : Json(nullptr);
  return j;
}

std::string pad6(std::size_t t) {
  std::string s = std::to_string(t);
  return std::string(s.size() < 6 ? 6 - s.size() : 0, '0') + s;
}

CheckpointMeta checkpoint_meta(const RunConfig& rc, std::size_t iteration, const std::string& graph) {
  CheckpointMeta m;
  m.iteration = iteration;
  const auto& t = rc.train;
  m.extra["variant"] = to_string(t.variant);
  m.extra["mode"] = rc.mode;
  m.extra["seed"] = std::to_string(t.seed);
  m.extra["graph"] = graph.empty() ? "-" : graph;
  m.extra["sampler.restart_prob"] = num(t.sampler.restart_prob);
  m.extra["sampler.walk_steps"] = std::to_string(t.sampler.walk_steps);
  m.extra["sampler.max_nodes"] = std::to_string(t.sampler.max_nodes);
  m.extra["sampler.d_feat"] = std::to_string(t.sampler.d_feat);
  return m;
}

}  // namespace

SamplerParams sampler_from_meta(const CheckpointMeta& m, std::size_t d_feat) {
  SamplerParams p;
  p.d_feat = d_feat;
  auto read = [&](const char* key, auto& field) {
    const auto it = m.extra.find(key);
    if (it == m.extra.end()) return;
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), field);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail(Errc::format, std::string("checkpoint: bad value for meta.") + key);
  };
  read("sampler.restart_prob", p.restart_prob);
  read("sampler.walk_steps", p.walk_steps);
  read("sampler.max_nodes", p.max_nodes);
  p.validate();
  return p;
}

std::string graph_label(const fs::path& path) { return path.stem().string(); }

std::string sha256_file(const fs::path& path) {
  const std::string data = read_text(path);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    fail(Errc::io, "SHA-256 failed for " + path.string());
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void write_manifest(const fs::path& dir, std::vector<std::string> artifacts) {
  std::sort(artifacts.begin(), artifacts.end());
  Json list = Json::array();
  for (const auto& rel : artifacts) {
    const fs::path p = dir / rel;
    list.push_back({{"path", rel}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
  }
  write_text(dir / "manifest.json", Json{{"artifacts", list}}.dump(2) + "\n");
}

CommandResult cmd_props(const Json& resolved) {
  CommandResult r;
  r.resolved = resolved;
  const auto paths = resolved.at("graphs").get<std::vector<std::string>>();
  const auto out = resolved.at("out").get<std::string>();
  require(!paths.empty(), "props: no graph files given");

  struct Row {
    std::string path;
    LoadReport report;
    Graph lcc;
    GraphStats stats;
    std::string error;
  };
  std::vector<Row> rows(paths.size());
  std::vector<GraphStats> ok_stats;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    rows[i].path = paths[i];
    try {
      rows[i].report = load_edge_list(paths[i]);
      rows[i].lcc = largest_connected_component(rows[i].report.graph);
      rows[i].stats = compute_stats(rows[i].report.graph);
      ok_stats.push_back(rows[i].stats);
    } catch (const Error& e) {
      rows[i].error = e.what();
      ++r.failures;
      r.warnings.push_back(paths[i] + ": " + e.what());
    }
  }
  const bool with_z = ok_stats.size() >= 2;
  if (!with_z) r.warnings.push_back("z-scores need a pool of at least two graphs; emitting raw properties only");
  const auto z = with_z ? z_normalize(ok_stats) : ok_stats;

  std::string jsonl;
  std::size_t k = 0;
  for (const auto& row : rows) {
    Json j;
    j["graph"] = graph_label(row.path);
    j["path"] = row.path;
    if (!row.error.empty()) {
      j["error"] = row.error;
    } else {
      j["nodes"] = row.report.graph.num_nodes();
      j["edges"] = row.report.graph.num_edges();
      j["edge_lines"] = row.report.edge_lines;
      j["removed_lines"] = row.report.removed_lines();
      j["lcc_nodes"] = row.lcc.num_nodes();
      j["lcc_edges"] = row.lcc.num_edges();
      j.update(stats_json(z[k++], with_z));
    }
    jsonl += j.dump() + "\n";
  }
  r.summary = {{"graphs", paths.size()}, {"failures", r.failures}, {"z_scores", with_z}};
  if (out.empty()) {
    r.stdout_text = jsonl;
  } else {
    make_dir(out);
    write_text(fs::path(out) / "props.jsonl", jsonl);
    write_manifest(out, {"props.jsonl"});
    r.summary["out"] = out;
  }
  return r;
}

CommandResult cmd_gen(const Json& resolved) {
  CommandResult r;
  r.resolved = resolved;
  const GenConfig cfg = gen_config_from_json(resolved);
  make_dir(cfg.out);
  std::vector<std::string> files;
  Json list = Json::array();
  for (auto n : cfg.n) {
    for (double a : cfg.alpha) {
      for (auto seed : cfg.seeds) {
        DegreeTarget target{n, a, cfg.d_min, cfg.d_max, seed};
        const std::string name = "pl_n" + std::to_string(n) + "_a" + num(a) + "_s" + std::to_string(seed);
        Graph g = generate_powerlaw_graph(target, name);
        if (cfg.lcc) {
          g = largest_connected_component(g);
          g.set_name(name);
        }
        const std::string file = name + ".txt";
        write_edge_list(g, fs::path(cfg.out) / file);
        files.push_back(file);
        list.push_back({{"file", file}, {"nodes", g.num_nodes()}, {"edges", g.num_edges()}});
      }
    }
  }
  write_manifest(cfg.out, files);
  r.summary = {{"out", cfg.out}, {"graphs", list}};
  return r;
}

CommandResult cmd_pretrain(const Json& resolved) {
  CommandResult r;
  r.resolved = resolved;
  const RunConfig rc = run_config_from_json(resolved);
  require(!rc.graphs.empty(), "pretrain: no graph files given");
  require(!rc.out.empty(), "pretrain: an output directory is required");

  std::vector<Graph> pool;
  std::set<std::string> names;
  for (const auto& path : rc.graphs) {
    Graph g = load_edge_list(path).graph;
    const auto label = graph_label(path);
    if (!names.insert(label).second) fail(Errc::invalid_argument, "pretrain: two graph files share the name " + label);
    g.set_name(label);
    pool.push_back(std::move(g));
  }

  const fs::path out = rc.out;
  make_dir(out / "checkpoints");
  std::vector<std::string> artifacts;
  SelectionCallback on_select;
  if (rc.selection_checkpoints) {
    on_select = [&](const SelectionEvent& ev, const ModelParams& params) {
      const std::string rel = "checkpoints/iter_" + pad6(ev.t) + ".ckpt";
      save_checkpoint(out / rel, params, checkpoint_meta(rc, ev.t, ev.chosen));
      artifacts.push_back(rel);
    };
  }

  PretrainResult res = rc.mode == "select"
                           ? pretrain(pool, rc.train, on_select)
                           : pretrain_baseline(pool, rc.train, baseline_from_string(rc.mode), rc.order, on_select);

  write_text(out / "runlog.jsonl", res.log.to_jsonl());
  save_checkpoint(out / "final.ckpt", res.params, checkpoint_meta(rc, res.log.iterations.size(), ""));
  write_text(out / "config.resolved.json", resolved.dump(2) + "\n");
  artifacts.insert(artifacts.end(), {"runlog.jsonl", "final.ckpt", "config.resolved.json"});
  write_manifest(out, artifacts);
  // Wall time varies run to run, so it stays out of the hashed artifacts.
  write_text(out / "timing.json", Json{{"wall_seconds", res.log.wall_seconds}}.dump() + "\n");

  r.summary = {{"out", rc.out},
               {"iterations", res.log.iterations.size()},
               {"chosen_history", res.log.chosen_history},
               {"stop_reason", res.log.stop_reason},
               {"final_mean_loss", res.log.iterations.empty() ? Json(nullptr)
                                                              : Json(res.log.iterations.back().mean_loss)}};
  return r;
}

CommandResult cmd_probe(const Json& resolved) {
  CommandResult r;
  r.resolved = resolved;
  const ProbeRequest req = probe_request_from_json(resolved);
  const Checkpoint ck = load_checkpoint(req.checkpoint);
  const SamplerParams sampler = sampler_from_meta(ck.meta, ck.params.config().d_feat);
  Graph g = load_edge_list(req.graph).graph;
  g.set_name(graph_label(req.graph));
  const NodeLabels labels = load_labels(req.labels, g);
  require(!labels.nodes.empty(), "probe: label file names no nodes");

  const Matrix all = embed_nodes(ck.params, g, sampler, req.embed_seed, req.probe.threads);
  Matrix x(labels.nodes.size(), all.cols());
  for (std::size_t i = 0; i < labels.nodes.size(); ++i) {
    const auto row = all.row(labels.nodes[i]);
    std::copy(row.begin(), row.end(), x.row(i).begin());
  }
  const ProbeResult pr = logistic_probe(x, labels.classes, req.probe);

  Json j;
  j["micro_f1_mean"] = pr.mean;
  j["micro_f1_std"] = pr.std;
  j["n_splits"] = pr.n_splits;
  j["test_frac"] = pr.test_frac;
  j["seed"] = pr.seed;
  j["split_scores"] = pr.split_scores;
  j["labeled_nodes"] = labels.nodes.size();
  j["classes"] = labels.class_names;
  r.summary = j;
  r.stdout_text = j.dump(2) + "\n";
  if (!req.out.empty()) {
    make_dir(req.out);
    write_text(fs::path(req.out) / "probe.json", r.stdout_text);
    write_manifest(req.out, {"probe.json"});
  }
  return r;
}

CommandResult cmd_report(const Json& resolved) {
  CommandResult r;
  r.resolved = resolved;
  const auto runlogs = resolved.at("runlogs").get<std::vector<std::string>>();
  const auto out = resolved.at("out").get<std::string>();
  require(!runlogs.empty(), "report: no RunLog files given");
  require(!out.empty(), "report: an output directory is required");

  std::string loss = "run,t,graph,epochs_on_graph,mean_loss,penalty,total,uncertainty,gamma\n";
  std::string order = "run,position,t,graph,beta,gamma,used_uncertainty\n";
  std::string forget = "run,t,graph,uncertainty\n";
  auto opt_num = [](const Json& v) { return v.is_null() ? std::string() : num(v.get<double>()); };
  std::size_t loss_rows = 0;
  for (std::size_t run = 0; run < runlogs.size(); ++run) {
    std::istringstream in(read_text(runlogs[run]));
    std::string line;
    std::size_t lineno = 0, position = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const Json j = Json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("type"))
        fail(Errc::parse, runlogs[run] + ":" + std::to_string(lineno) + ": not a RunLog record");
      try {
        const auto type = j.at("type").get<std::string>();
        const std::string prefix = std::to_string(run) + ",";
        if (type == "iteration") {
          const auto t = std::to_string(j.at("t").get<std::size_t>());
          loss += prefix + t + "," + j.at("graph").get<std::string>() + "," +
                  std::to_string(j.at("epochs_on_graph").get<std::size_t>()) + "," + opt_num(j.at("mean_loss")) +
                  "," + opt_num(j.at("penalty")) + "," + opt_num(j.at("total")) + "," +
                  opt_num(j.at("uncertainty")) + "," + opt_num(j.at("gamma")) + "\n";
          ++loss_rows;
          for (const auto& [g, u] : j.at("tracked").items()) forget += prefix + t + "," + g + "," + opt_num(u) + "\n";
        } else if (type == "selection") {
          order += prefix + std::to_string(position++) + "," + std::to_string(j.at("t").get<std::size_t>()) + "," +
                   j.at("chosen").get<std::string>() + "," + opt_num(j.at("beta")) + "," + opt_num(j.at("gamma")) +
                   "," + (j.at("used_uncertainty").get<bool>() ? "1" : "0") + "\n";
        }
      } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse, runlogs[run] + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  make_dir(out);
  write_text(fs::path(out) / "loss_curves.csv", loss);
  write_text(fs::path(out) / "selection_order.csv", order);
  write_text(fs::path(out) / "forgetting.csv", forget);
  write_manifest(out, {"loss_curves.csv", "selection_order.csv", "forgetting.csv"});
  r.summary = {{"out", out}, {"runs", runlogs.size()}, {"loss_rows", loss_rows}};
  return r;
}

CommandResult run_command(std::string_view command, const Json& resolved) {
  if (command == "props") return cmd_props(resolved);
  if (command == "gen") return cmd_gen(resolved);
  if (command == "pretrain") return cmd_pretrain(resolved);
  if (command == "probe") return cmd_probe(resolved);
  if (command == "report") return cmd_report(resolved);
  fail(Errc::invalid_argument, "unknown command '" + std::string(command) + "'");
}

}  // namespace apt
