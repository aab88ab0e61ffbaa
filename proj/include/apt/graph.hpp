#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace apt {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Immutable undirected simple graph in CSR form. Neighbor lists are sorted
// ascending; there are no self-loops or parallel edges, and node ids are dense.
// original_id(v) keeps the id the node had in its source (edge-list file or
// parent graph) so subgraphs and label files can be joined back.
class Graph {
 public:
  Graph() = default;

  // Builds a graph on num_nodes nodes. Edges are symmetrized; self-loops and
  // duplicates (in either orientation) are dropped and counted in the
  // optional out-parameters.
  static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges, std::string name = {},
                          std::size_t* self_loops = nullptr, std::size_t* duplicates = nullptr);

  [[nodiscard]] std::size_t num_nodes() const noexcept { return degrees_.size(); }
  [[nodiscard]] std::size_t num_edges() const noexcept { return num_edges_; }
  [[nodiscard]] std::uint32_t degree(NodeId v) const { return degrees_[v]; }
  [[nodiscard]] const std::vector<std::uint32_t>& degrees() const noexcept { return degrees_; }
  [[nodiscard]] std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  [[nodiscard]] bool has_edge(NodeId u, NodeId v) const;
  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] std::uint64_t original_id(NodeId v) const {
    return original_ids_.empty() ? v : original_ids_[v];
  }

  // Each undirected edge once, as (u, v) with u < v, in ascending order.
  [[nodiscard]] std::vector<Edge> edge_list() const;

  void set_name(std::string name) { name_ = std::move(name); }
  void set_original_ids(std::vector<std::uint64_t> ids);

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::vector<std::uint32_t> degrees_;
  std::vector<std::uint64_t> original_ids_;
  std::size_t num_edges_ = 0;
  std::string name_;
};

struct LoadReport {
  Graph graph;
  std::size_t edge_lines = 0;  // non-comment, non-blank lines
  std::size_t self_loops = 0;
  std::size_t duplicates = 0;  // includes reversed copies of directed edges

  [[nodiscard]] std::size_t removed_lines() const noexcept { return self_loops + duplicates; }
};

// Reads a whitespace-separated "u v" edge list ('#' comments, blank lines
// skipped). Ids are parsed as unsigned 64-bit integers and compacted to
// 0..n-1 in ascending order of original id; ids occurring only in self-loop
// lines do not create nodes.
// Throws Error{io} if unreadable, Error{parse} on a malformed line and
// Error{empty_graph} if no edge survives cleanup.
LoadReport load_edge_list(const std::filesystem::path& path);

// Writes "u v" lines (u < v) using original ids, preceded by a comment header.
void write_edge_list(const Graph& g, const std::filesystem::path& path);

// Induced subgraph on the largest connected component; among equally large
// components the one holding the smallest node id wins.
Graph largest_connected_component(const Graph& g);

// Induced subgraph on `nodes` (duplicates ignored), relabeled by ascending
// id. Original ids are inherited from g.
Graph induce_subgraph(const Graph& g, std::span<const NodeId> nodes);

// Component id per node, numbered in order of each component's smallest node.
std::vector<std::uint32_t> connected_components(const Graph& g, std::size_t* count = nullptr);

}  // namespace apt
