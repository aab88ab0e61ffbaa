#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "apt/error.hpp"
#include "apt/graph.hpp"
#include "apt/rng.hpp"

namespace testing {

using apt::Edge;
using apt::Graph;
using apt::NodeId;

inline Graph make_graph(std::size_t n, std::vector<Edge> edges, std::string name = "g") {
  return Graph::from_edges(n, edges, std::move(name));
}

inline Graph path_graph(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e, "path");
}

inline Graph cycle_graph(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i) e.emplace_back(i, static_cast<NodeId>((i + 1) % n));
  return make_graph(n, e, "cycle");
}

inline Graph complete_graph(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return make_graph(n, e, "complete");
}

inline Graph star_graph(std::size_t leaves) {
  std::vector<Edge> e;
  for (NodeId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make_graph(leaves + 1, e, "star");
}

// Erdos-Renyi G(n, p) with a random spanning tree added, so it is connected.
inline Graph random_connected(std::size_t n, double p, apt::Rng& rng, std::string name = "rc") {
  std::vector<Edge> e;
  for (NodeId v = 1; v < n; ++v) e.emplace_back(static_cast<NodeId>(rng.below(v)), v);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (rng.uniform() < p) e.emplace_back(i, j);
  return make_graph(n, e, std::move(name));
}

// G(n, p) without the connectivity guarantee.
inline Graph random_graph(std::size_t n, double p, apt::Rng& rng) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (rng.uniform() < p) e.emplace_back(i, j);
  return make_graph(n, e, "er");
}

// Breadth-first component sizes over an adjacency matrix; independent of the
// library's CSR traversal.
inline std::vector<std::vector<NodeId>> bfs_components(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (auto [u, v] : g.edge_list()) adj[u][v] = adj[v][u] = 1;
  std::vector<int> seen(n, 0);
  std::vector<std::vector<NodeId>> comps;
  for (NodeId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<NodeId> queue{s};
    seen[s] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head)
      for (NodeId w = 0; w < n; ++w)
        if (adj[queue[head]][w] && !seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
    comps.push_back(queue);
  }
  return comps;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("apt_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Central difference of f at x[i] with step h.
inline double central_diff(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                           std::size_t i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2 * h);
}

// Error code thrown by f, or 0 when it returns normally.
template <class F>
int errc_of(F&& f) {
  try {
    f();
  } catch (const apt::Error& e) {
    return static_cast<int>(e.code());
  }
  return 0;
}

inline int code(apt::Errc e) { return static_cast<int>(e); }

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace testing
