#include "apt/properties.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "apt/error.hpp"

namespace apt {

double network_entropy_closed(const Graph& g) {
  if (g.num_edges() == 0) fail(Errc::empty_graph, "network entropy of a graph without edges");
  double acc = 0;
  for (auto d : g.degrees())
    if (d > 1) acc += static_cast<double>(d) * std::log(static_cast<double>(d));
  return acc / (2.0 * static_cast<double>(g.num_edges()));
}

double network_entropy_general(const Graph& g, const PowerIterationOptions& opts) {
  const std::size_t n = g.num_nodes();
  if (g.num_edges() == 0) fail(Errc::empty_graph, "network entropy of a graph without edges");
  for (auto d : g.degrees())
    if (d == 0) fail(Errc::invalid_argument, "random walk undefined on an isolated node; pass a connected graph");

  auto step = [&](const std::vector<double>& pi, std::vector<double>& out) {
    for (NodeId j = 0; j < n; ++j) {
      double s = 0;
      for (NodeId i : g.neighbors(j)) s += pi[i] / static_cast<double>(g.degree(i));
      out[j] = s;
    }
  };

  std::vector<double> cur(n, 1.0 / static_cast<double>(n)), nxt(n), avg(n), prev_avg(n);
  step(cur, nxt);
  for (std::size_t i = 0; i < n; ++i) prev_avg[i] = 0.5 * (cur[i] + nxt[i]);
  std::swap(cur, nxt);

  bool reached = false;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  const double floor = 4.0 * std::numeric_limits<double>::epsilon();
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    step(cur, nxt);
    double residual = 0;
    for (std::size_t i = 0; i < n; ++i) {
      avg[i] = 0.5 * (cur[i] + nxt[i]);
      residual += std::abs(avg[i] - prev_avg[i]);
    }
    std::swap(cur, nxt);
    std::swap(avg, prev_avg);
    if (residual < opts.tolerance) reached = true;
    if (residual < 0.99 * best) {
      best = residual;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (reached && (residual <= floor || since_best > 200)) break;
  }
  if (!reached) fail(Errc::numerical, "stationary distribution did not converge within the iteration cap");

  const double total = std::accumulate(prev_avg.begin(), prev_avg.end(), 0.0);
  double h = 0;
  for (NodeId i = 0; i < n; ++i) {
    const double p_ij = 1.0 / static_cast<double>(g.degree(i));
    const double row = -static_cast<double>(g.degree(i)) * p_ij * std::log(p_ij);
    h += (prev_avg[i] / total) * row;
  }
  return h;
}

double density(const Graph& g) {
  const auto n = static_cast<double>(g.num_nodes());
  require(g.num_nodes() >= 2, "density needs at least two nodes");
  return 2.0 * static_cast<double>(g.num_edges()) / (n * (n - 1.0));
}

double average_degree(const Graph& g) {
  require(g.num_nodes() >= 1, "average degree of an empty graph");
  return 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(g.num_nodes());
}

double degree_variance(const Graph& g) {
  require(g.num_nodes() >= 1, "degree variance of an empty graph");
  const double mean = average_degree(g);
  double acc = 0;
  for (auto d : g.degrees()) acc += (d - mean) * (d - mean);
  return acc / static_cast<double>(g.num_nodes());
}

double scale_free_exponent(std::span<const std::uint32_t> degrees) {
  require(!degrees.empty(), "scale-free exponent of an empty degree sequence");
  double acc = 0;
  for (auto d : degrees) {
    require(d >= 1, "scale-free exponent needs all degrees >= 1");
    acc += std::log(static_cast<double>(d) / 0.5);
  }
  return 1.0 + static_cast<double>(degrees.size()) / acc;
}

double scale_free_exponent(const Graph& g) { return scale_free_exponent(g.degrees()); }

double discrete_powerlaw_mle(std::span<const std::uint32_t> degrees, std::uint32_t d_min, std::uint32_t d_max) {
  require(!degrees.empty(), "power-law fit of an empty sample");
  require(1 <= d_min && d_min < d_max, "power-law fit needs 1 <= d_min < d_max");
  double mean_log = 0;
  std::size_t count = 0;
  for (auto d : degrees) {
    if (d < d_min || d > d_max) continue;
    mean_log += std::log(static_cast<double>(d));
    ++count;
  }
  require(count > 0, "no samples inside the power-law support");
  mean_log /= static_cast<double>(count);

  // E_a[ln d] under p(d) ~ d^-a is decreasing in a; match it to the sample mean.
  auto expected_log = [&](double a) {
    double z = 0, s = 0;
    for (std::uint32_t d = d_min; d <= d_max; ++d) {
      const double w = std::pow(static_cast<double>(d), -a);
      z += w;
      s += w * std::log(static_cast<double>(d));
    }
    return s / z;
  };
  double lo = 1e-3, hi = 50.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (expected_log(mid) > mean_log ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

GraphStats compute_stats(const Graph& g) {
  if (g.num_edges() == 0) fail(Errc::empty_graph, "graph properties need at least one edge");
  const Graph lcc = largest_connected_component(g);
  GraphStats s;
  s.entropy = network_entropy_closed(lcc);
  s.density = density(lcc);
  s.avg_degree = average_degree(lcc);
  s.degree_variance = degree_variance(lcc);
  s.alpha = scale_free_exponent(lcc);
  return s;
}

std::vector<double> z_scores(std::span<const double> values) {
  require(values.size() >= 2, "z-normalization needs a pool of at least two");
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(values.size(), 0.0);
  // Relative guard: a column of identical values can leave rounding-level spread.
  if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

std::vector<GraphStats> z_normalize(std::span<const GraphStats> pool) {
  require(pool.size() >= 2, "z-normalization needs a pool of at least two");
  std::vector<GraphStats> out(pool.begin(), pool.end());
  auto column = [&](double GraphStats::*raw, double GraphStats::*z) {
    std::vector<double> xs;
    xs.reserve(pool.size());
    for (const auto& s : pool) xs.push_back(s.*raw);
    const auto zs = z_scores(xs);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].*z = zs[i];
  };
  column(&GraphStats::entropy, &GraphStats::z_entropy);
  column(&GraphStats::density, &GraphStats::z_density);
  column(&GraphStats::avg_degree, &GraphStats::z_avg_degree);
  column(&GraphStats::degree_variance, &GraphStats::z_degree_variance);
  column(&GraphStats::alpha, &GraphStats::z_alpha);
  return out;
}

double property_score(const GraphStats& z) {
  return (z.z_entropy + z.z_density + z.z_avg_degree + z.z_degree_variance - z.z_alpha) / 5.0;
}

}  // namespace apt
