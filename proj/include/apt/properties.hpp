#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "apt/graph.hpp"

namespace apt {

// The five structural properties that feed the property term of the graph
// score, plus their z-scores over a candidate pool. Raw values are in nats
// (entropy) or dimensionless; z fields are zero until z_normalize fills them.
struct GraphStats {
  double entropy = 0;
  double density = 0;
  double avg_degree = 0;
  double degree_variance = 0;
  double alpha = 0;

  double z_entropy = 0;
  double z_density = 0;
  double z_avg_degree = 0;
  double z_degree_variance = 0;
  double z_alpha = 0;
};

// (1/2|E|) * sum_i d_i ln d_i. Requires at least one edge; intended for a
// connected graph (pass the LCC).
double network_entropy_closed(const Graph& g);

struct PowerIterationOptions {
  double tolerance = 1e-10;  // L1 residual that must be reached
  std::size_t max_iterations = 2'000'000;
};

// Entropy rate -sum_i pi_i sum_j P_ij ln P_ij of the simple random walk
// P_ij = 1/d_i, with pi found by power iteration (never from the degree
// vector). Iterates are averaged pairwise so period-2 (bipartite) chains
// converge. After the tolerance is met, iteration continues until the residual
// stops shrinking, down to the rounding floor.
// Throws Error{numerical} if the tolerance is not reached within the cap.
double network_entropy_general(const Graph& g, const PowerIterationOptions& opts = {});

double density(const Graph& g);          // 2|E| / (|V|(|V|-1)), |V| >= 2
double average_degree(const Graph& g);   // 2|E| / |V|
double degree_variance(const Graph& g);  // population variance of degrees

// Discrete power-law exponent, closed-form approximation with d_min = 1:
// 1 + n / sum_i ln(d_i / 0.5). All degrees must be >= 1.
double scale_free_exponent(const Graph& g);
double scale_free_exponent(std::span<const std::uint32_t> degrees);

// Exact discrete maximum-likelihood exponent for p(d) = d^-a / H(a, d_min, d_max)
// on the given support, found by bisection on the score equation. Used to check
// generator output; not a selection input.
double discrete_powerlaw_mle(std::span<const std::uint32_t> degrees, std::uint32_t d_min, std::uint32_t d_max);

// All five raw properties, computed on the LCC of g.
GraphStats compute_stats(const Graph& g);

// Column-wise (x - mean) / population std over the pool; a zero-std column
// maps to zeros. Raw fields are kept. Pool size must be >= 2.
std::vector<GraphStats> z_normalize(std::span<const GraphStats> pool);

// Plain z-scores of a series, same rules as z_normalize.
std::vector<double> z_scores(std::span<const double> values);

// MEAN(z_entropy, z_density, z_avg_degree, z_degree_variance, -z_alpha).
double property_score(const GraphStats& z);

}  // namespace apt
