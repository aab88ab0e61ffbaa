#include "apt/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "apt/error.hpp"
#include "apt/parallel.hpp"

namespace apt {

void SamplerParams::validate() const {
  require(restart_prob > 0.0 && restart_prob <= 1.0, "sampler: restart_prob must be in (0, 1]");
  require(max_nodes >= 1, "sampler: max_nodes must be >= 1");
  require(d_feat >= 3, "sampler: d_feat must be >= 3");
}

std::vector<NodeId> rwr_node_set(const Graph& g, NodeId ego, const SamplerParams& params, Rng& rng) {
  require(ego < g.num_nodes(), "rwr: ego out of range");
  require(params.restart_prob > 0.0 && params.restart_prob <= 1.0, "rwr: restart_prob must be in (0, 1]");
  std::vector<NodeId> visited{ego};
  if (g.degree(ego) == 0 || params.max_nodes <= 1) return visited;

  std::unordered_set<NodeId> seen{ego};
  NodeId cur = ego;
  for (std::size_t step = 0; step < params.walk_steps && visited.size() < params.max_nodes; ++step) {
    if (rng.uniform() < params.restart_prob) {
      cur = ego;
      continue;
    }
    auto nb = g.neighbors(cur);
    cur = nb[rng.below(nb.size())];
    if (seen.insert(cur).second) visited.push_back(cur);
  }
  return visited;
}

Matrix normalized_laplacian(const Graph& g) {
  const std::size_t n = g.num_nodes();
  Matrix lap(n, n);
  for (NodeId i = 0; i < n; ++i) {
    if (g.degree(i) == 0) continue;
    lap(i, i) = 1.0;
    for (NodeId j : g.neighbors(i))
      lap(i, j) = -1.0 / std::sqrt(static_cast<double>(g.degree(i)) * static_cast<double>(g.degree(j)));
  }
  return lap;
}

Matrix build_features(const Graph& sub, NodeId anchor, std::size_t d_feat) {
  const std::size_t n = sub.num_nodes();
  require(n >= 1, "build_features: empty subgraph");
  require(anchor < n, "build_features: anchor out of range");
  require(d_feat >= 3, "build_features: d_feat must be >= 3");
  Matrix x(n, d_feat);
  const std::size_t eig_cols = d_feat - 2;

  if (sub.num_edges() > 0) {
    const auto eig = jacobi_eigen(normalized_laplacian(sub));
    const std::size_t k = std::min(n, eig_cols);
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t arg = 0;
      for (std::size_t r = 1; r < n; ++r)
        if (std::abs(eig.vectors(r, c)) > std::abs(eig.vectors(arg, c))) arg = r;
      const double sign = eig.vectors(arg, c) < 0 ? -1.0 : 1.0;
      for (std::size_t r = 0; r < n; ++r) x(r, c) = sign * eig.vectors(r, c);
    }
  }
  for (NodeId r = 0; r < n; ++r) x(r, d_feat - 2) = std::log1p(static_cast<double>(sub.degree(r)));
  x(anchor, d_feat - 1) = 1.0;
  return x;
}

SubgraphInstance make_instance(const Graph& g, NodeId ego, const SamplerParams& params, Rng& rng) {
  params.validate();
  const auto nodes = rwr_node_set(g, ego, params, rng);
  SubgraphInstance inst;
  inst.subgraph = induce_subgraph(g, nodes);
  // induce_subgraph relabels by ascending source id.
  std::vector<NodeId> sorted(nodes);
  std::sort(sorted.begin(), sorted.end());
  inst.anchor = static_cast<NodeId>(std::lower_bound(sorted.begin(), sorted.end(), ego) - sorted.begin());
  inst.ego = ego;
  inst.ego_global = g.original_id(ego);
  inst.source_graph = g.name();
  inst.features = build_features(inst.subgraph, inst.anchor, params.d_feat);
  return inst;
}

InstancePair positive_pair(const Graph& g, NodeId ego, const SamplerParams& params, Rng& rng) {
  InstancePair pair;
  pair.query = make_instance(g, ego, params, rng);
  pair.key = make_instance(g, ego, params, rng);
  return pair;
}

std::vector<InstancePair> sample_pairs(const Graph& g, const std::vector<NodeId>& egos, const SamplerParams& params,
                                       std::uint64_t seed, std::size_t threads) {
  std::vector<InstancePair> out(egos.size());
  parallel_for(egos.size(), threads, [&](std::size_t i) {
    Rng rng = Rng::derive(seed, {i + 1});
    out[i] = positive_pair(g, egos[i], params, rng);
  });
  return out;
}

std::vector<InstancePair> sample_batch(const Graph& g, std::size_t batch_size, const SamplerParams& params, Rng& rng,
                                       std::size_t threads) {
  require(batch_size >= 2, "sample_batch: batch_size must be >= 2 for in-batch negatives");
  require(g.num_nodes() >= 1, "sample_batch: empty graph");
  const std::uint64_t seed = rng.next();
  Rng ego_rng = Rng::derive(seed, {0});
  std::vector<NodeId> egos(batch_size);
  for (auto& e : egos) e = static_cast<NodeId>(ego_rng.below(g.num_nodes()));
  return sample_pairs(g, egos, params, seed, threads);
}

}  // namespace apt
