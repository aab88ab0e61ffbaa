#include "apt/selector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "apt/error.hpp"

namespace apt {

void SelectionConfig::validate() const {
  require(F >= 1, "selection: F must be >= 1");
  require(T >= 1, "selection: T must be >= 1");
  require(beta_c2 > 0.0 && beta_c2 < 1.0, "selection: beta_c2 must be in (0, 1)");
  require(M >= 1, "selection: M must be >= 1");
  require(pool_size >= 2, "selection: pool_size must be >= 2");
}

double beta_schedule(std::size_t t, double c1, double c2) { return c1 - std::pow(c2, static_cast<double>(t)); }

double gamma_from_uniform(double beta, double u) {
  require(beta > 0.0, "gamma draw: beta must be positive");
  return 1.0 - std::pow(u, 1.0 / beta);
}

double draw_gamma(double beta, Rng& rng) {
  // uniform() is in [0, 1); flip it onto (0, 1] so gamma stays in [0, 1).
  return gamma_from_uniform(beta, 1.0 - rng.uniform());
}

double score_graph(const GraphStats& z_stats, double z_uncertainty, double gamma) {
  return (1.0 - gamma) * z_uncertainty + gamma * property_score(z_stats);
}

SelectorState::SelectorState(std::vector<std::string> candidates, std::uint64_t seed)
    : remaining(std::move(candidates)), rng(Rng::derive(seed, {stream::selector})) {
  std::sort(remaining.begin(), remaining.end());
  require(std::adjacent_find(remaining.begin(), remaining.end()) == remaining.end(),
          "selector: candidate labels must be unique");
}

SelectionEvent select_graph(SelectorState& state, const std::map<std::string, GraphStats>& raw_stats,
                            const UncertaintyFn& uncertainty, const SelectionConfig& config, GammaMode mode) {
  if (state.remaining.empty()) fail(Errc::invalid_argument, "select_graph: candidate pool is empty");
  for (const auto& label : state.remaining)
    if (!raw_stats.count(label)) fail(Errc::invalid_argument, "select_graph: no properties for graph '" + label + "'");

  SelectionEvent ev;
  ev.t = state.t;
  ev.beta = beta_schedule(state.t, config.beta_c1, config.beta_c2);
  const bool warming = state.t == 0 || state.t < config.warmup;
  if (warming || mode == GammaMode::properties_only) {
    ev.gamma = 1.0;
  } else if (mode == GammaMode::uncertainty_only) {
    ev.gamma = 0.0;
  } else {
    ev.gamma = draw_gamma(ev.beta, state.rng);
  }
  state.beta_t = ev.beta;
  state.gamma_t = ev.gamma;

  const auto& rem = state.remaining;
  std::size_t best = 0;
  if (rem.size() == 1) {
    ev.scores.emplace_back(rem[0], 0.0);
  } else {
    std::vector<GraphStats> pool;
    pool.reserve(rem.size());
    for (const auto& label : rem) pool.push_back(raw_stats.at(label));
    const auto z = z_normalize(pool);

    std::vector<double> z_unc(rem.size(), 0.0);
    if (ev.gamma < 1.0) {
      ev.used_uncertainty = true;
      std::vector<double> raw(rem.size());
      for (std::size_t i = 0; i < rem.size(); ++i) {
        raw[i] = uncertainty(rem[i]);
        state.uncertainty_cache[rem[i]] = raw[i];
      }
      z_unc = z_scores(raw);
    }
    for (std::size_t i = 0; i < rem.size(); ++i) {
      const double j = score_graph(z[i], z_unc[i], ev.gamma);
      ev.scores.emplace_back(rem[i], j);
      // rem is sorted, so strict '>' keeps the smallest label on ties.
      if (j > ev.scores[best].second) best = i;
    }
  }

  ev.chosen = rem[best];
  state.history.push_back(ev.chosen);
  state.remaining.erase(state.remaining.begin() + static_cast<std::ptrdiff_t>(best));
  state.uncertainty_cache.erase(ev.chosen);
  return ev;
}

std::vector<std::size_t> filter_samples(std::span<const double> losses, double T_s, std::size_t min_batch) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < losses.size(); ++i)
    if (losses[i] > T_s) kept.push_back(i);
  if (kept.size() >= min_batch) return kept;

  std::vector<std::size_t> order(losses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return losses[a] > losses[b]; });
  order.resize(std::min(min_batch, order.size()));
  return order;
}

bool should_switch(double graph_uncertainty, std::size_t epochs_on_graph, const SelectionConfig& config) {
  return graph_uncertainty < config.T_g || epochs_on_graph >= config.F;
}

bool pool_exhausted(SelectorState& state, const UncertaintyFn& uncertainty, double stop_threshold) {
  if (state.remaining.empty()) return true;
  for (const auto& label : state.remaining) {
    auto it = state.uncertainty_cache.find(label);
    if (it == state.uncertainty_cache.end()) {
      if (!uncertainty) return false;
      it = state.uncertainty_cache.emplace(label, uncertainty(label)).first;
    }
    if (!(it->second < stop_threshold)) return false;
  }
  return true;
}

}  // namespace apt
