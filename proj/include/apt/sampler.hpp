#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "apt/graph.hpp"
#include "apt/linalg.hpp"
#include "apt/rng.hpp"

namespace apt {

struct SamplerParams {
  double restart_prob = 0.8;
  std::size_t walk_steps = 256;
  std::size_t max_nodes = 64;
  std::size_t d_feat = 32;

  void validate() const;
};

// An RWR-induced subgraph around one ego node with its feature matrix
// (subgraph.num_nodes() x d_feat).
struct SubgraphInstance {
  Graph subgraph;
  NodeId anchor = 0;            // local id of the ego inside subgraph
  NodeId ego = 0;               // ego id in the source graph
  std::uint64_t ego_global = 0; // ego's original id (edge-list id)
  std::string source_graph;
  Matrix features;
};

struct InstancePair {
  SubgraphInstance query;
  SubgraphInstance key;
};

// Random walk with restart from ego for walk_steps steps. At each step the
// walker jumps back to ego with probability restart_prob, otherwise moves to a
// uniform neighbor. Returns visited nodes in first-visit order (ego first),
// truncated to max_nodes. An isolated ego yields {ego}.
std::vector<NodeId> rwr_node_set(const Graph& g, NodeId ego, const SamplerParams& params, Rng& rng);

// Columns [0, d_feat-2): eigenvectors of the symmetric normalized Laplacian in
// ascending eigenvalue order, each signed so its largest-magnitude entry is
// positive; zero-padded when fewer exist, and all zero for an edgeless
// subgraph. Column d_feat-2: ln(1 + degree). Column d_feat-1: anchor flag.
Matrix build_features(const Graph& sub, NodeId anchor, std::size_t d_feat);

// Symmetric normalized Laplacian I - D^-1/2 A D^-1/2 (isolated nodes get 0 on the diagonal).
Matrix normalized_laplacian(const Graph& g);

SubgraphInstance make_instance(const Graph& g, NodeId ego, const SamplerParams& params, Rng& rng);

// Two independent draws from the same ego (query first, then key, on one stream).
InstancePair positive_pair(const Graph& g, NodeId ego, const SamplerParams& params, Rng& rng);

// batch_size egos drawn uniformly with replacement, one positive pair each.
// The batch consumes one value from rng; egos and each pair then use streams
// derived from it, so pairs can be built on `threads` workers without changing
// the result.
std::vector<InstancePair> sample_batch(const Graph& g, std::size_t batch_size, const SamplerParams& params, Rng& rng,
                                       std::size_t threads = 1);

// Pairs for explicitly given egos (pair i on stream (seed, i)).
std::vector<InstancePair> sample_pairs(const Graph& g, const std::vector<NodeId>& egos, const SamplerParams& params,
                                       std::uint64_t seed, std::size_t threads = 1);

}  // namespace apt
