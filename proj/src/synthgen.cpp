#include "apt/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "apt/error.hpp"
#include "apt/rng.hpp"

namespace apt {

void DegreeTarget::validate() const {
  require(alpha > 1.0, "degree target: alpha must exceed 1");
  require(d_min >= 1, "degree target: d_min must be >= 1");
  require(d_min <= d_max, "degree target: d_min must not exceed d_max");
  require(d_max < n, "degree target: d_max must be below n");
}

std::vector<std::uint32_t> powerlaw_degree_sequence(const DegreeTarget& target) {
  target.validate();
  const std::size_t support = target.d_max - target.d_min + 1;
  std::vector<double> cdf(support);
  double acc = 0;
  for (std::size_t k = 0; k < support; ++k) {
    acc += std::pow(static_cast<double>(target.d_min + k), -target.alpha);
    cdf[k] = acc;
  }
  for (auto& c : cdf) c /= acc;
  cdf.back() = 1.0;

  Rng rng(target.seed);
  std::vector<std::uint32_t> seq(target.n);
  std::uint64_t sum = 0;
  for (auto& d : seq) {
    const double u = rng.uniform();
    const auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    d = target.d_min + static_cast<std::uint32_t>(std::min(k, support - 1));
    sum += d;
  }
  if (sum % 2 == 1) ++seq.back();
  return seq;
}

Graph configuration_model(const std::vector<std::uint32_t>& degrees, std::uint64_t seed, std::string name) {
  require(!degrees.empty(), "configuration model: empty degree sequence");
  std::uint64_t total = 0;
  for (auto d : degrees) total += d;
  require(total % 2 == 0, "configuration model: degree sum must be even");

  std::vector<NodeId> stubs;
  stubs.reserve(total);
  for (NodeId v = 0; v < degrees.size(); ++v) stubs.insert(stubs.end(), degrees[v], v);

  Rng rng(seed);
  for (std::size_t i = stubs.size(); i > 1; --i) std::swap(stubs[i - 1], stubs[rng.below(i)]);

  std::vector<Edge> edges;
  edges.reserve(stubs.size() / 2);
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) edges.emplace_back(stubs[i], stubs[i + 1]);
  return Graph::from_edges(degrees.size(), edges, std::move(name));
}

Graph generate_powerlaw_graph(const DegreeTarget& target, std::string name) {
  const auto seq = powerlaw_degree_sequence(target);
  return configuration_model(seq, mix_seed(target.seed, {0xc0f1}), std::move(name));
}

}  // namespace apt
