#include "apt/apt.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "apt/commands.hpp"
#include "apt/error.hpp"
#include "apt/probe.hpp"
#include "apt/properties.hpp"

struct apt_graph {
  apt::Graph graph;
};

struct apt_model {
  apt::Checkpoint checkpoint;
  apt::SamplerParams sampler;
};

namespace {

thread_local std::string last_error;

apt_status set_error(apt_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
apt_status guarded(F&& f) {
  try {
    f();
    return APT_OK;
  } catch (const apt::Error& e) {
    return set_error(static_cast<apt_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(APT_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(APT_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(APT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(APT_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(APT_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (!p) apt::fail(apt::Errc::invalid_argument, std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* apt_version(void) { return "1.0.0"; }

const char* apt_last_error(void) { return last_error.c_str(); }

const char* apt_status_name(apt_status status) {
  switch (status) {
    case APT_OK: return "ok";
    case APT_ERR_INVALID_ARGUMENT: return "invalid argument";
    case APT_ERR_IO: return "i/o error";
    case APT_ERR_PARSE: return "parse error";
    case APT_ERR_EMPTY_GRAPH: return "empty graph";
    case APT_ERR_FORMAT: return "format error";
    case APT_ERR_VERSION: return "unsupported version";
    case APT_ERR_NUMERICAL: return "numerical error";
    case APT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void apt_string_free(char* s) { std::free(s); }

apt_status apt_graph_load(const char* path, apt_graph** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto g = std::make_unique<apt_graph>();
    g->graph = apt::load_edge_list(path).graph;
    g->graph.set_name(apt::graph_label(path));
    *out = g.release();
  });
}

apt_status apt_graph_from_edges(size_t num_nodes, const uint32_t* edges, size_t num_edges, const char* name,
                                apt_graph** out) {
  return guarded([&] {
    need(out, "out");
    if (num_edges > 0) need(edges, "edges");
    std::vector<apt::Edge> list(num_edges);
    for (size_t i = 0; i < num_edges; ++i) {
      if (edges[2 * i] >= num_nodes || edges[2 * i + 1] >= num_nodes)
        apt::fail(apt::Errc::invalid_argument, "edge endpoint out of range");
      list[i] = {edges[2 * i], edges[2 * i + 1]};
    }
    auto g = std::make_unique<apt_graph>();
    g->graph = apt::Graph::from_edges(num_nodes, list, name ? name : "");
    *out = g.release();
  });
}

void apt_graph_free(apt_graph* g) { delete g; }

apt_status apt_graph_size(const apt_graph* g, size_t* num_nodes, size_t* num_edges) {
  return guarded([&] {
    need(g, "graph");
    if (num_nodes) *num_nodes = g->graph.num_nodes();
    if (num_edges) *num_edges = g->graph.num_edges();
  });
}

apt_status apt_graph_stats_json(const apt_graph* g, char** out_json) {
  return guarded([&] {
    need(g, "graph");
    need(out_json, "out_json");
    const auto s = apt::compute_stats(g->graph);
    apt::Json j{{"entropy", s.entropy},
                {"density", s.density},
                {"avg_degree", s.avg_degree},
                {"degree_variance", s.degree_variance},
                {"alpha", s.alpha}};
    *out_json = dup_string(j.dump());
  });
}

apt_status apt_graph_entropy(const apt_graph* g, double* out) {
  return guarded([&] {
    need(g, "graph");
    need(out, "out");
    *out = apt::compute_stats(g->graph).entropy;
  });
}

apt_status apt_model_load(const char* path, apt_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto m = std::make_unique<apt_model>();
    m->checkpoint = apt::load_checkpoint(path);
    m->sampler = apt::sampler_from_meta(m->checkpoint.meta, m->checkpoint.params.config().d_feat);
    *out = m.release();
  });
}

void apt_model_free(apt_model* m) { delete m; }

apt_status apt_model_info(const apt_model* m, size_t* num_params, size_t* d_feat, size_t* d_emb) {
  return guarded([&] {
    need(m, "model");
    const auto& p = m->checkpoint.params;
    if (num_params) *num_params = p.size();
    if (d_feat) *d_feat = p.config().d_feat;
    if (d_emb) *d_emb = p.config().d_emb;
  });
}

apt_status apt_model_embed_nodes(const apt_model* m, const apt_graph* g, uint64_t seed, size_t threads, double* out,
                                 size_t out_len) {
  return guarded([&] {
    need(m, "model");
    need(g, "graph");
    need(out, "out");
    const auto& p = m->checkpoint.params;
    if (out_len < g->graph.num_nodes() * p.config().d_emb)
      apt::fail(apt::Errc::invalid_argument, "output buffer too small");
    const auto e = apt::embed_nodes(p, g->graph, m->sampler, seed, threads == 0 ? 1 : threads);
    std::memcpy(out, e.data(), e.size() * sizeof(double));
  });
}

apt_status apt_command_defaults(const char* command, char** out_json) {
  return guarded([&] {
    need(command, "command");
    need(out_json, "out_json");
    *out_json = dup_string(apt::command_defaults(command).dump(2));
  });
}

apt_status apt_command_resolve(const char* command, const char* file_json, const char* const* overrides,
                               size_t num_overrides, char** out_json) {
  return guarded([&] {
    need(command, "command");
    need(out_json, "out_json");
    if (num_overrides > 0) need(overrides, "overrides");
    apt::Json file;
    if (file_json) {
      file = apt::Json::parse(file_json, nullptr, false);
      if (file.is_discarded()) apt::fail(apt::Errc::parse, "config is not valid JSON");
    }
    std::vector<std::string> ov(overrides, overrides + num_overrides);
    *out_json = dup_string(apt::resolve_config(command, file, ov).dump(2));
  });
}

apt_status apt_command_run(const char* command, const char* resolved_json, char** out_json) {
  return guarded([&] {
    need(command, "command");
    need(resolved_json, "resolved_json");
    need(out_json, "out_json");
    const auto resolved = apt::Json::parse(resolved_json, nullptr, false);
    if (resolved.is_discarded()) apt::fail(apt::Errc::parse, "config is not valid JSON");
    const auto r = apt::run_command(command, resolved);
    apt::Json j{{"resolved", r.resolved},
                {"summary", r.summary},
                {"stdout", r.stdout_text},
                {"warnings", r.warnings},
                {"failures", r.failures}};
    *out_json = dup_string(j.dump());
  });
}

}  // extern "C"
