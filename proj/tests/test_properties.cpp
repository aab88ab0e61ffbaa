#include <doctest.h>

#include <array>
#include <cmath>
#include <numeric>

#include "apt/properties.hpp"
#include "apt/synthgen.hpp"
#include "support.hpp"

using namespace apt;
using namespace testing;

TEST_CASE("closed-form entropy on regular graphs and stars") {
  CHECK(network_entropy_closed(cycle_graph(5)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(network_entropy_closed(complete_graph(4)) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  // Star with k leaves: (k ln k + k * 1 ln 1) / 2k.
  for (std::size_t k : {1, 2, 5, 17}) {
    CHECK(network_entropy_closed(star_graph(k)) ==
          doctest::Approx(std::log(static_cast<double>(k)) / 2).epsilon(1e-14));
  }
  CHECK(network_entropy_closed(complete_graph(4)) > network_entropy_closed(complete_graph(3)));
  CHECK(errc_of([] { network_entropy_closed(make_graph(3, {})); }) == code(Errc::empty_graph));
}

TEST_CASE("power-iteration entropy reproduces the closed form") {
  CHECK(std::abs(network_entropy_general(cycle_graph(5)) - std::log(2.0)) < 1e-10);
  CHECK(std::abs(network_entropy_general(complete_graph(4)) - std::log(3.0)) < 1e-10);
  // Bipartite chains have period 2; averaging iterates must still converge.
  for (const auto& g : {cycle_graph(4), cycle_graph(10), path_graph(7), star_graph(6)}) {
    CHECK(std::abs(network_entropy_general(g) - network_entropy_closed(g)) < 1e-8);
  }
  Rng gen(77);
  for (int trial = 0; trial < 25; ++trial) {
    const auto g = random_connected(2 + gen.below(60), gen.uniform() * 0.2, gen);
    CAPTURE(trial);
    CHECK(std::abs(network_entropy_general(g) - network_entropy_closed(g)) < 1e-8);
  }
  CHECK(errc_of([] { network_entropy_general(make_graph(3, {{0, 1}})); }) == code(Errc::invalid_argument));
}

TEST_CASE("density, average degree and degree variance") {
  const auto k4 = complete_graph(4);
  CHECK(density(k4) == 1.0);
  CHECK(average_degree(k4) == 3.0);
  CHECK(degree_variance(k4) == 0.0);
  const auto s4 = star_graph(4);
  CHECK(average_degree(s4) == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(degree_variance(s4) == doctest::Approx(1.44).epsilon(1e-14));
  CHECK(density(s4) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(errc_of([] { density(make_graph(1, {})); }) == code(Errc::invalid_argument));
}

TEST_CASE("scale-free exponent estimator") {
  CHECK(scale_free_exponent(cycle_graph(5)) == doctest::Approx(1.0 + 1.0 / std::log(4.0)).epsilon(1e-14));
  CHECK(scale_free_exponent(cycle_graph(5)) == doctest::Approx(1.7213).epsilon(1e-4));
  const std::vector<std::uint32_t> d{1, 1, 2, 3, 8};
  double denom = 0;
  for (auto x : d) denom += std::log(2.0 * x);
  CHECK(scale_free_exponent(d) == doctest::Approx(1.0 + 5.0 / denom).epsilon(1e-14));
  Rng gen(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint32_t> seq(1 + gen.below(100));
    for (auto& x : seq) x = static_cast<std::uint32_t>(1 + gen.below(500));
    CHECK(scale_free_exponent(seq) > 1.0);
  }
  CHECK(errc_of([] { scale_free_exponent(std::vector<std::uint32_t>{}); }) == code(Errc::invalid_argument));
}

TEST_CASE("z-normalization") {
  const std::vector<double> col{1, 2, 3};
  const auto z = z_scores(col);
  CHECK(z[0] == doctest::Approx(-1.2247448713915890).epsilon(1e-14));
  CHECK(z[1] == doctest::Approx(0.0));
  CHECK(z[2] == doctest::Approx(1.2247448713915890).epsilon(1e-14));
  for (double v : z_scores(std::vector<double>{5, 5, 5})) CHECK(v == 0.0);
  CHECK(errc_of([] { z_scores(std::vector<double>{1}); }) == code(Errc::invalid_argument));

  Rng gen(11);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> v(2 + gen.below(20));
    for (auto& x : v) x = gen.uniform() * 100 - 50;
    const auto zz = z_scores(v);
    const double n = static_cast<double>(zz.size());
    const double mean = std::accumulate(zz.begin(), zz.end(), 0.0) / n;
    double var = 0;
    for (double x : zz) var += (x - mean) * (x - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::sqrt(var / n) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("property score") {
  GraphStats s;
  CHECK(property_score(s) == 0.0);
  s.z_entropy = s.z_density = s.z_avg_degree = s.z_degree_variance = 1.0;
  s.z_alpha = -1.0;
  CHECK(property_score(s) == 1.0);
}

TEST_CASE("pool scores match a spreadsheet-style recomputation") {
  const std::vector<Graph> pool{complete_graph(5), star_graph(6), cycle_graph(8)};
  std::vector<GraphStats> raw;
  for (const auto& g : pool) raw.push_back(compute_stats(g));
  const auto z = z_normalize(raw);

  // Independent recomputation from degree sequences.
  std::vector<std::array<double, 5>> cols;
  for (const auto& g : pool) {
    const double n = static_cast<double>(g.num_nodes());
    const double m = static_cast<double>(g.num_edges());
    double dlnd = 0, sum_d2 = 0, ln2d = 0;
    for (auto d : g.degrees()) {
      dlnd += d * std::log(static_cast<double>(d));
      sum_d2 += static_cast<double>(d) * d;
      ln2d += std::log(2.0 * d);
    }
    const double avg = 2 * m / n;
    cols.push_back({dlnd / (2 * m), 2 * m / (n * (n - 1)), avg, sum_d2 / n - avg * avg, 1 + n / ln2d});
  }
  for (std::size_t k = 0; k < 5; ++k) {
    double mean = 0, var = 0;
    for (const auto& c : cols) mean += c[k] / 3;
    for (const auto& c : cols) var += (c[k] - mean) * (c[k] - mean) / 3;
    for (auto& c : cols) c[k] = (c[k] - mean) / std::sqrt(var);
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double expect = (cols[i][0] + cols[i][1] + cols[i][2] + cols[i][3] - cols[i][4]) / 5;
    CHECK(property_score(z[i]) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(z[i].entropy == raw[i].entropy);
  }
}

TEST_CASE("compute_stats works on the largest component") {
  // K5 plus a disjoint edge: stats equal those of K5 alone.
  std::vector<Edge> e;
  for (NodeId i = 0; i < 5; ++i)
    for (NodeId j = i + 1; j < 5; ++j) e.emplace_back(i, j);
  e.emplace_back(5, 6);
  const auto s = compute_stats(make_graph(7, e));
  const auto k = compute_stats(complete_graph(5));
  CHECK(s.entropy == k.entropy);
  CHECK(s.density == k.density);
  CHECK(s.avg_degree == k.avg_degree);
  CHECK(s.degree_variance == k.degree_variance);
  CHECK(s.alpha == k.alpha);
}

TEST_CASE("entropy is bounded below by ln(average degree)") {
  Rng gen(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = random_connected(2 + gen.below(80), gen.uniform() * 0.3, gen);
    CHECK(network_entropy_closed(g) >= std::log(average_degree(g)) - 1e-12);
  }
}

TEST_CASE("discrete power-law MLE recovers the exponent of its own model") {
  // Exact expected ln d under p(d) ~ d^-a on [1, 50], fed back as a sample mean.
  for (double a : {1.5, 2.0, 2.5, 3.5}) {
    std::vector<std::uint32_t> sample;
    for (std::uint32_t d = 1; d <= 50; ++d) {
      const auto copies = static_cast<std::size_t>(std::llround(1e6 * std::pow(d, -a)));
      sample.insert(sample.end(), copies, d);
    }
    CHECK(discrete_powerlaw_mle(sample, 1, 50) == doctest::Approx(a).epsilon(2e-3));
  }
}
