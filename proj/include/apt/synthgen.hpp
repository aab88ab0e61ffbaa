#pragma once

#include <cstdint>
#include <vector>

#include "apt/graph.hpp"

namespace apt {

// Power-law degree target for the configuration-model generator.
struct DegreeTarget {
  std::size_t n = 0;
  double alpha = 2.5;
  std::uint32_t d_min = 1;
  std::uint32_t d_max = 0;
  std::uint64_t seed = 0;

  // 1 <= d_min <= d_max < n and alpha > 1; throws Error{invalid_argument}.
  void validate() const;
};

// n i.i.d. draws from p(d) ~ d^-alpha on [d_min, d_max] by inverse CDF over
// the finite support. An odd total is fixed by incrementing the last entry.
std::vector<std::uint32_t> powerlaw_degree_sequence(const DegreeTarget& target);

// Erased configuration model: stubs are shuffled (Fisher-Yates on the seed's
// stream) and paired consecutively; self-loops and multi-edges are then
// dropped, so realized degrees never exceed the targets.
Graph configuration_model(const std::vector<std::uint32_t>& degrees, std::uint64_t seed, std::string name = {});

// powerlaw_degree_sequence followed by configuration_model on a derived stream.
Graph generate_powerlaw_graph(const DegreeTarget& target, std::string name = {});

}  // namespace apt
