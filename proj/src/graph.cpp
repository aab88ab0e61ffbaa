#include "apt/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "apt/error.hpp"

namespace apt {

Graph Graph::from_edges(std::size_t num_nodes, std::span<const Edge> edges, std::string name,
                        std::size_t* self_loops, std::size_t* duplicates) {
  std::vector<Edge> canon;
  canon.reserve(edges.size());
  std::size_t loops = 0;
  for (auto [u, v] : edges) {
    require(u < num_nodes && v < num_nodes, "edge endpoint out of range");
    if (u == v) {
      ++loops;
      continue;
    }
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  const auto before = canon.size();
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
  if (self_loops) *self_loops = loops;
  if (duplicates) *duplicates = before - canon.size();

  Graph g;
  g.name_ = std::move(name);
  g.num_edges_ = canon.size();
  g.degrees_.assign(num_nodes, 0);
  for (auto [u, v] : canon) {
    ++g.degrees_[u];
    ++g.degrees_[v];
  }
  g.offsets_.assign(num_nodes + 1, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) g.offsets_[v + 1] = g.offsets_[v] + g.degrees_[v];
  g.adjacency_.resize(g.offsets_[num_nodes]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // canon is sorted by (u, v): lower neighbors arrive first in ascending order,
  // then higher ones, so every list ends up sorted.
  for (auto [u, v] : canon) g.adjacency_[cursor[v]++] = u;
  for (auto [u, v] : canon) g.adjacency_[cursor[u]++] = v;
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges_);
  for (NodeId u = 0; u < num_nodes(); ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

void Graph::set_original_ids(std::vector<std::uint64_t> ids) {
  require(ids.empty() || ids.size() == num_nodes(), "original id vector length mismatch");
  original_ids_ = std::move(ids);
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

// Splits a line into tokens in place; returns false on a comment/blank line.
bool tokenize(std::string_view line, std::vector<std::string_view>& tokens) {
  tokens.clear();
  std::size_t i = 0;
  while (i < line.size() && is_space(line[i])) ++i;
  if (i == line.size() || line[i] == '#') return false;
  while (i < line.size()) {
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    tokens.push_back(line.substr(i, j - i));
    while (j < line.size() && is_space(line[j])) ++j;
    i = j;
  }
  return true;
}

std::uint64_t parse_id(std::string_view tok, std::size_t line_no, const std::filesystem::path& path) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    fail(Errc::parse, path.string() + ":" + std::to_string(line_no) + ": not an unsigned integer node id: '" +
                          std::string(tok) + "'");
  return value;
}

}  // namespace

LoadReport load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open edge list: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail(Errc::io, "read error on edge list: " + path.string());
  const std::string text = buffer.str();

  LoadReport report;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
  std::vector<std::string_view> tokens;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!tokenize(line, tokens)) continue;
    if (tokens.size() != 2)
      fail(Errc::parse, path.string() + ":" + std::to_string(line_no) + ": expected two node ids, got " +
                            std::to_string(tokens.size()) + " tokens");
    ++report.edge_lines;
    const auto u = parse_id(tokens[0], line_no, path);
    const auto v = parse_id(tokens[1], line_no, path);
    if (u == v) {
      ++report.self_loops;
      continue;
    }
    raw.emplace_back(u, v);
  }

  std::vector<std::uint64_t> ids;
  ids.reserve(raw.size() * 2);
  for (auto [u, v] : raw) {
    ids.push_back(u);
    ids.push_back(v);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() > std::numeric_limits<NodeId>::max()) fail(Errc::format, "too many nodes in " + path.string());

  auto dense = [&](std::uint64_t id) {
    return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (auto [u, v] : raw) edges.emplace_back(dense(u), dense(v));

  report.graph = Graph::from_edges(ids.size(), edges, path.stem().string(), nullptr, &report.duplicates);
  if (report.graph.num_edges() == 0) fail(Errc::empty_graph, "edge list has no usable edges: " + path.string());
  report.graph.set_original_ids(std::move(ids));
  return report;
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot write edge list: " + path.string());
  out << "# " << (g.name().empty() ? "graph" : g.name()) << " nodes " << g.num_nodes() << " edges "
      << g.num_edges() << '\n';
  for (auto [u, v] : g.edge_list()) out << g.original_id(u) << ' ' << g.original_id(v) << '\n';
  if (!out) fail(Errc::io, "write failed: " + path.string());
}

std::vector<std::uint32_t> connected_components(const Graph& g, std::size_t* count) {
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> comp(g.num_nodes(), unset);
  std::vector<NodeId> stack;
  std::uint32_t next = 0;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (comp[s] != unset) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(u)) {
        if (comp[w] == unset) {
          comp[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return comp;
}

Graph largest_connected_component(const Graph& g) {
  std::size_t n_comp = 0;
  const auto comp = connected_components(g, &n_comp);
  std::vector<std::size_t> sizes(n_comp, 0);
  for (auto c : comp) ++sizes[c];
  // Components are numbered by their smallest node, so the first maximum is the tie winner.
  const auto best = static_cast<std::uint32_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  if (n_comp <= 1) return g;
  std::vector<NodeId> nodes;
  nodes.reserve(sizes[best]);
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (comp[v] == best) nodes.push_back(v);
  return induce_subgraph(g, nodes);
}

Graph induce_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  std::vector<NodeId> sorted(nodes.begin(), nodes.end());
  for (NodeId v : sorted)
    if (v >= g.num_nodes()) fail(Errc::invalid_argument, "induce_subgraph: node id out of range");
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::size_t k = sorted.size();

  auto local = [&](NodeId v) -> std::ptrdiff_t {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
    return (it != sorted.end() && *it == v) ? it - sorted.begin() : -1;
  };

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < k; ++i) {
    const NodeId u = sorted[i];
    auto nb = g.neighbors(u);
    if (nb.size() <= k) {
      for (NodeId w : nb) {
        if (w <= u) continue;
        if (auto j = local(w); j >= 0) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
      }
    } else {
      // High-degree node: probe the (small) node set against its neighbor list instead.
      for (std::size_t j = i + 1; j < k; ++j)
        if (std::binary_search(nb.begin(), nb.end(), sorted[j]))
          edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  Graph sub = Graph::from_edges(k, edges, g.name());
  std::vector<std::uint64_t> ids(k);
  for (std::size_t i = 0; i < k; ++i) ids[i] = g.original_id(sorted[i]);
  sub.set_original_ids(std::move(ids));
  return sub;
}

}  // namespace apt
