#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "apt/properties.hpp"
#include "apt/rng.hpp"

namespace apt {

struct SelectionConfig {
  double T_s = 3.0;             // keep training samples with loss above this (nats)
  double T_g = 2.0;             // switch graphs once its uncertainty drops below this (nats)
  double stop_threshold = 3.5;  // stop when every candidate is below this (nats)
  std::size_t F = 6;            // max epochs on one graph
  std::size_t T = 100;          // total iteration budget
  std::size_t warmup = 20;      // iterations with gamma forced to 1
  double beta_c1 = 3.0;
  double beta_c2 = 0.995;
  std::size_t M = 500;          // instances per graph-uncertainty estimate
  std::size_t pool_size = 2000; // candidate instances per epoch

  void validate() const;
};

// How gamma is chosen after warmup.
enum class GammaMode {
  schedule,          // gamma ~ Beta(1, beta_t)
  properties_only,   // gamma = 1 throughout (no uncertainty term)
  uncertainty_only,  // gamma = 0 after warmup (no property term)
};

// c1 - c2^t
double beta_schedule(std::size_t t, double c1, double c2);

// Beta(1, beta) by inverse CDF: 1 - u^(1/beta).
double gamma_from_uniform(double beta, double u);
double draw_gamma(double beta, Rng& rng);

// (1 - gamma) * z_uncertainty + gamma * property_score(z_stats)
double score_graph(const GraphStats& z_stats, double z_uncertainty, double gamma);

struct SelectorState {
  explicit SelectorState(std::vector<std::string> candidates, std::uint64_t seed);

  std::size_t t = 0;
  double beta_t = 0;
  double gamma_t = 1.0;
  std::vector<std::string> remaining;  // kept sorted
  std::vector<std::string> history;
  std::map<std::string, double> uncertainty_cache;  // raw nats, from the latest estimate
  Rng rng;
};

struct SelectionEvent {
  std::size_t t = 0;
  double beta = 0;
  double gamma = 1.0;
  std::string chosen;
  bool used_uncertainty = false;
  std::vector<std::pair<std::string, double>> scores;  // J per remaining graph, label order
};

// Raw uncertainty (nats) of a candidate under the current model.
using UncertaintyFn = std::function<double(const std::string&)>;

// Chooses the next graph. At t == 0 or t < warmup gamma is 1 and no uncertainty
// is requested; otherwise uncertainties of all remaining graphs are fetched,
// z-scored over the remaining pool together with the properties, and the
// argmax of the score is taken (ties: smallest label). The choice moves from
// remaining to history.
SelectionEvent select_graph(SelectorState& state, const std::map<std::string, GraphStats>& raw_stats,
                            const UncertaintyFn& uncertainty, const SelectionConfig& config,
                            GammaMode mode = GammaMode::schedule);

// Indices of losses above T_s in input order; when fewer than min_batch pass,
// the min_batch largest (ties: lower index) in descending-loss order.
std::vector<std::size_t> filter_samples(std::span<const double> losses, double T_s, std::size_t min_batch);

bool should_switch(double graph_uncertainty, std::size_t epochs_on_graph, const SelectionConfig& config);

// True when no candidate remains or every remaining graph's uncertainty is
// below the threshold. Missing cache entries are filled through `uncertainty`
// (when given); a graph with no known value counts as not exhausted.
bool pool_exhausted(SelectorState& state, const UncertaintyFn& uncertainty, double stop_threshold);

}  // namespace apt
