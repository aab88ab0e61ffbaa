#include "apt/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <variant>

#include <json.hpp>

#include "apt/error.hpp"
#include "apt/rng.hpp"

namespace apt {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::apt: return "apt";
    case Variant::apt_l2: return "apt-l2";
    case Variant::apt_r: return "apt-r";
    case Variant::apt_g: return "apt-g";
    case Variant::apt_p: return "apt-p";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  for (auto v : {Variant::apt, Variant::apt_l2, Variant::apt_r, Variant::apt_g, Variant::apt_p})
    if (s == to_string(v)) return v;
  fail(Errc::invalid_argument, "unknown variant '" + s + "' (expected apt, apt-l2, apt-r, apt-g or apt-p)");
}

const char* to_string(BaselineMode m) {
  switch (m) {
    case BaselineMode::all_graphs_uniform: return "all_graphs_uniform";
    case BaselineMode::random_order: return "random_order";
    case BaselineMode::reverse_order: return "reverse_order";
  }
  return "?";
}

BaselineMode baseline_from_string(const std::string& s) {
  for (auto m : {BaselineMode::all_graphs_uniform, BaselineMode::random_order, BaselineMode::reverse_order})
    if (s == to_string(m)) return m;
  fail(Errc::invalid_argument, "unknown baseline mode '" + s + "'");
}

Optimizer::Optimizer(std::size_t n, OptimizerConfig config) : config_(std::move(config)) {
  require(config_.kind == "adam" || config_.kind == "sgd", "optimizer kind must be 'adam' or 'sgd'");
  require(config_.lr >= 0.0, "optimizer: learning rate must be >= 0");
  if (config_.kind == "adam") {
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
  }
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
  require(params.size() == grad.size(), "optimizer: gradient length mismatch");
  ++steps_;
  if (config_.kind == "sgd") {
    for (std::size_t j = 0; j < params.size(); ++j) params[j] -= config_.lr * grad[j];
    return;
  }
  require(m_.size() == params.size(), "optimizer: parameter length changed");
  const double k = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(config_.beta1, k);
  const double c2 = 1.0 - std::pow(config_.beta2, k);
  for (std::size_t j = 0; j < params.size(); ++j) {
    m_[j] = config_.beta1 * m_[j] + (1.0 - config_.beta1) * grad[j];
    v_[j] = config_.beta2 * v_[j] + (1.0 - config_.beta2) * grad[j] * grad[j];
    params[j] -= config_.lr * (m_[j] / c1) / (std::sqrt(v_[j] / c2) + config_.eps);
  }
}

void TrainConfig::validate() const {
  selection.validate();
  encoder.validate();
  sampler.validate();
  require(encoder.d_feat == sampler.d_feat, "encoder.d_feat must equal sampler.d_feat");
  require(batch_size >= 2, "batch_size must be >= 2");
  require(tau > 0.0, "tau must be positive");
  require(fisher_batches >= 1, "fisher_batches must be >= 1");
  require(!lambda || *lambda >= 0.0, "lambda must be >= 0");
  require(threads >= 1, "threads must be >= 1");
  Optimizer(0, optimizer);
}

double TrainConfig::effective_lambda() const {
  if (variant == Variant::apt_r) return 0.0;
  if (lambda) return *lambda;
  return variant == Variant::apt_l2 ? 10.0 : 500.0;
}

LossContext TrainConfig::loss_context() const { return LossContext{sampler, batch_size, tau, threads}; }

EpochResult train_epoch(ModelParams& params, Optimizer& optimizer, const std::vector<InstancePair>& pairs,
                        const FisherDiag* fisher, double lambda, const TrainConfig& config) {
  require(pairs.size() >= 2, "train_epoch: need at least two instance pairs");
  const LossContext ctx = config.loss_context();
  EpochResult r;
  double nce_sum = 0;
  std::size_t instances = 0;
  for (std::size_t start = 0; start + 1 < pairs.size(); start += config.batch_size) {
    const std::size_t end = std::min(pairs.size(), start + config.batch_size);
    const std::vector<InstancePair> batch(pairs.begin() + static_cast<std::ptrdiff_t>(start),
                                          pairs.begin() + static_cast<std::ptrdiff_t>(end));
    const auto obj = batch_objective(params, batch, fisher, lambda, ctx);
    const double mean_nce = obj.info_nce / static_cast<double>(batch.size());
    if (!std::isfinite(obj.total) || mean_nce > config.divergence_limit)
      fail(Errc::numerical, "training diverged: batch loss " + std::to_string(mean_nce) + " per instance (total " +
                                std::to_string(obj.total) + ")");
    optimizer.step(params.flat(), obj.grad);
    nce_sum += obj.info_nce;
    instances += batch.size();
    r.batch_info_nce.push_back(obj.info_nce);
    r.batch_penalty.push_back(obj.penalty);
    r.batch_total.push_back(obj.total);
  }
  const auto nb = static_cast<double>(r.batch_total.size());
  r.mean_loss = nce_sum / static_cast<double>(instances);
  r.mean_penalty = std::accumulate(r.batch_penalty.begin(), r.batch_penalty.end(), 0.0) / nb;
  r.mean_total = std::accumulate(r.batch_total.begin(), r.batch_total.end(), 0.0) / nb;
  return r;
}

namespace {

struct Exhausted {};
struct NoCandidates {};
using Choice = std::variant<SelectionEvent, Exhausted, NoCandidates>;
using Chooser = std::function<Choice(std::size_t t, const ModelParams&)>;

std::map<std::string, std::size_t> index_pool(const std::vector<Graph>& pool) {
  require(!pool.empty(), "pretraining pool is empty");
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    require(!pool[i].name().empty(), "every pool graph needs a name");
    require(pool[i].num_edges() > 0, "pool graph '" + pool[i].name() + "' has no edges");
    if (!idx.emplace(pool[i].name(), i).second)
      fail(Errc::invalid_argument, "duplicate graph name in pool: " + pool[i].name());
  }
  return idx;
}

std::vector<InstancePair> sample_candidates(const Graph& g, const TrainConfig& cfg, std::size_t t,
                                            std::vector<double>& losses, const ModelParams& params) {
  const LossContext ctx = cfg.loss_context();
  const std::size_t n_batches = (cfg.selection.pool_size + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<InstancePair> pairs;
  losses.clear();
  for (std::size_t b = 0; b < n_batches; ++b) {
    Rng rng = Rng::derive(cfg.seed, {stream::candidates, t, b});
    auto batch = sample_batch(g, cfg.batch_size, cfg.sampler, rng, cfg.threads);
    const auto l = batch_losses(params, batch, ctx);
    losses.insert(losses.end(), l.begin(), l.end());
    std::move(batch.begin(), batch.end(), std::back_inserter(pairs));
  }
  return pairs;
}

template <class T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

PretrainResult run_sequential(const std::vector<Graph>& pool, const TrainConfig& cfg, const Chooser& choose,
                              const SelectionCallback& on_select) {
  const auto start = std::chrono::steady_clock::now();
  const auto idx = index_pool(pool);
  const LossContext ctx = cfg.loss_context();
  const double lambda = cfg.effective_lambda();

  PretrainResult out;
  out.params = init_params(cfg.encoder, cfg.seed);
  Optimizer opt(out.params.size(), cfg.optimizer);
  std::optional<FisherDiag> anchor;
  RunLog& log = out.log;

  auto first = choose(0, out.params);
  auto* ev = std::get_if<SelectionEvent>(&first);
  if (!ev) fail(Errc::invalid_argument, "no graph could be selected from the pool");
  log.selections.push_back(*ev);
  log.chosen_history.push_back(ev->chosen);
  if (on_select) on_select(*ev, out.params);
  std::size_t current = idx.at(ev->chosen);
  double gamma = ev->gamma;
  std::size_t epochs = 0;
  log.stop_reason = "iteration_budget";

  for (std::size_t t = 0; t < cfg.selection.T; ++t) {
    const Graph& g = pool[current];
    std::vector<double> losses;
    auto candidates = sample_candidates(g, cfg, t, losses, out.params);
    const auto keep = filter_samples(losses, cfg.selection.T_s, cfg.batch_size);
    std::vector<InstancePair> train;
    train.reserve(keep.size());
    for (auto i : keep) train.push_back(std::move(candidates[i]));
    Rng order_rng = Rng::derive(cfg.seed, {stream::epoch_order, t});
    shuffle_in_place(train, order_rng);

    const FisherDiag* fisher = anchor ? &*anchor : nullptr;
    const auto epoch = train_epoch(out.params, opt, train, fisher, lambda, cfg);
    ++epochs;

    IterationRecord rec;
    rec.t = t;
    rec.graph = g.name();
    rec.epochs_on_graph = epochs;
    rec.candidates = losses.size();
    rec.kept = train.size();
    rec.mean_loss = epoch.mean_loss;
    rec.penalty = epoch.mean_penalty;
    rec.total = epoch.mean_total;
    rec.gamma = gamma;
    rec.batch_info_nce = epoch.batch_info_nce;
    rec.batch_penalty = epoch.batch_penalty;
    rec.batch_total = epoch.batch_total;
    const double u =
        graph_uncertainty(out.params, g, cfg.selection.M, mix_seed(cfg.seed, {stream::uncertainty, t, current}), ctx)
            .graph_uncertainty;
    rec.uncertainty = u;
    if (cfg.track_M > 0) {
      for (const auto& label : log.chosen_history) {
        if (label == g.name()) continue;
        const std::size_t h = idx.at(label);
        rec.tracked.emplace_back(
            label, graph_uncertainty(out.params, pool[h], cfg.track_M, mix_seed(cfg.seed, {stream::tracking, h}), ctx)
                       .graph_uncertainty);
      }
    }
    log.iterations.push_back(std::move(rec));
    if (cfg.keep_snapshots) out.snapshots.push_back(out.params);

    if (t + 1 == cfg.selection.T) break;
    if (!should_switch(u, epochs, cfg.selection)) continue;

    auto next = choose(t + 1, out.params);
    if (std::holds_alternative<NoCandidates>(next)) continue;  // nothing left to move to: keep training g
    if (std::holds_alternative<Exhausted>(next)) {
      log.stop_reason = "pool_exhausted";
      break;
    }
    // Consolidate the graph just finished before moving on.
    if (cfg.variant == Variant::apt_l2) {
      anchor = identity_fisher(out.params, cfg.reg_layers);
    } else if (cfg.variant != Variant::apt_r) {
      anchor = fisher_diagonal(out.params, g, cfg.fisher_batches, mix_seed(cfg.seed, {stream::fisher, t}),
                               cfg.reg_layers, ctx);
    }
    auto& sel = std::get<SelectionEvent>(next);
    log.selections.push_back(sel);
    log.chosen_history.push_back(sel.chosen);
    if (on_select) on_select(sel, out.params);
    current = idx.at(sel.chosen);
    gamma = sel.gamma;
    epochs = 0;
  }
  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

GammaMode gamma_mode(Variant v) {
  if (v == Variant::apt_g) return GammaMode::uncertainty_only;
  if (v == Variant::apt_p) return GammaMode::properties_only;
  return GammaMode::schedule;
}

}  // namespace

PretrainResult pretrain(const std::vector<Graph>& pool, const TrainConfig& config, const SelectionCallback& on_select) {
  config.validate();
  const auto idx = index_pool(pool);
  const LossContext ctx = config.loss_context();

  std::map<std::string, GraphStats> stats;
  std::vector<std::string> labels;
  for (const auto& g : pool) {
    stats[g.name()] = compute_stats(g);
    labels.push_back(g.name());
  }
  SelectorState state(labels, config.seed);
  const GammaMode mode = gamma_mode(config.variant);

  Chooser choose = [&](std::size_t t, const ModelParams& params) -> Choice {
    state.t = t;
    auto estimate = [&](const std::string& label) {
      const std::size_t i = idx.at(label);
      return graph_uncertainty(params, pool[i], config.selection.M, mix_seed(config.seed, {stream::uncertainty, t, i}),
                               ctx)
          .graph_uncertainty;
    };
    if (state.remaining.empty()) return NoCandidates{};
    if (t > 0) {
      state.uncertainty_cache.clear();
      if (pool_exhausted(state, estimate, config.selection.stop_threshold)) return Exhausted{};
    }
    auto cached = [&](const std::string& label) {
      auto it = state.uncertainty_cache.find(label);
      return it != state.uncertainty_cache.end() ? it->second : estimate(label);
    };
    return select_graph(state, stats, cached, config.selection, mode);
  };
  return run_sequential(pool, config, choose, on_select);
}

PretrainResult pretrain_baseline(const std::vector<Graph>& pool, const TrainConfig& config, BaselineMode mode,
                                 std::vector<std::string> order, const SelectionCallback& on_select) {
  config.validate();
  const auto idx = index_pool(pool);

  if (mode == BaselineMode::all_graphs_uniform) {
    const auto start = std::chrono::steady_clock::now();
    PretrainResult out;
    out.params = init_params(config.encoder, config.seed);
    Optimizer opt(out.params.size(), config.optimizer);
    const std::size_t n_batches = (config.selection.pool_size + config.batch_size - 1) / config.batch_size;
    for (std::size_t t = 0; t < config.selection.T; ++t) {
      std::vector<InstancePair> train;
      for (std::size_t b = 0; b < n_batches; ++b) {
        Rng rng = Rng::derive(config.seed, {stream::candidates, t, b});
        const auto& g = pool[rng.below(pool.size())];
        auto batch = sample_batch(g, config.batch_size, config.sampler, rng, config.threads);
        std::move(batch.begin(), batch.end(), std::back_inserter(train));
      }
      Rng order_rng = Rng::derive(config.seed, {stream::epoch_order, t});
      shuffle_in_place(train, order_rng);
      const auto epoch = train_epoch(out.params, opt, train, nullptr, 0.0, config);
      IterationRecord rec;
      rec.t = t;
      rec.graph = "*";
      rec.epochs_on_graph = t + 1;
      rec.candidates = train.size();
      rec.kept = train.size();
      rec.mean_loss = epoch.mean_loss;
      rec.penalty = epoch.mean_penalty;
      rec.total = epoch.mean_total;
      rec.batch_info_nce = epoch.batch_info_nce;
      rec.batch_penalty = epoch.batch_penalty;
      rec.batch_total = epoch.batch_total;
      out.log.iterations.push_back(std::move(rec));
      if (config.keep_snapshots) out.snapshots.push_back(out.params);
    }
    out.log.stop_reason = "iteration_budget";
    out.log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

  if (order.empty())
    for (const auto& g : pool) order.push_back(g.name());
  for (const auto& label : order)
    if (!idx.count(label)) fail(Errc::invalid_argument, "order names unknown graph '" + label + "'");
  if (mode == BaselineMode::reverse_order) {
    std::reverse(order.begin(), order.end());
  } else {
    Rng rng = Rng::derive(config.seed, {stream::baseline_order});
    shuffle_in_place(order, rng);
  }

  std::size_t next = 0;
  Chooser choose = [&](std::size_t t, const ModelParams&) -> Choice {
    if (next == order.size()) return NoCandidates{};
    SelectionEvent ev;
    ev.t = t;
    ev.gamma = 1.0;
    ev.chosen = order[next++];
    return ev;
  };
  return run_sequential(pool, config, choose, on_select);
}

std::vector<double> forgetting_probe(const std::vector<ModelParams>& checkpoints, const Graph& g, std::size_t M,
                                     std::uint64_t seed, const LossContext& ctx) {
  std::vector<double> series;
  series.reserve(checkpoints.size());
  for (const auto& ck : checkpoints) series.push_back(graph_uncertainty(ck, g, M, seed, ctx).graph_uncertainty);
  return series;
}

std::string RunLog::to_jsonl() const {
  using nlohmann::ordered_json;
  std::string out;
  auto emit = [&](const ordered_json& j) {
    out += j.dump();
    out += '\n';
  };
  auto selection_json = [](const SelectionEvent& s) {
    ordered_json j;
    j["type"] = "selection";
    j["t"] = s.t;
    j["beta"] = s.beta;
    j["gamma"] = s.gamma;
    j["chosen"] = s.chosen;
    j["used_uncertainty"] = s.used_uncertainty;
    ordered_json scores = ordered_json::object();
    for (const auto& [label, score] : s.scores) scores[label] = score;
    j["scores"] = scores;
    return j;
  };
  // Selection events precede the iteration that first trains on their graph.
  std::size_t si = 0;
  for (const auto& it : iterations) {
    while (si < selections.size() && selections[si].t <= it.t) emit(selection_json(selections[si++]));
    ordered_json j;
    j["type"] = "iteration";
    j["t"] = it.t;
    j["graph"] = it.graph;
    j["epochs_on_graph"] = it.epochs_on_graph;
    j["candidates"] = it.candidates;
    j["kept"] = it.kept;
    j["mean_loss"] = it.mean_loss;
    j["penalty"] = it.penalty;
    j["total"] = it.total;
    j["uncertainty"] = it.uncertainty ? ordered_json(*it.uncertainty) : ordered_json(nullptr);
    j["gamma"] = it.gamma;
    j["batch_info_nce"] = it.batch_info_nce;
    j["batch_penalty"] = it.batch_penalty;
    j["batch_total"] = it.batch_total;
    ordered_json tracked = ordered_json::object();
    for (const auto& [label, u] : it.tracked) tracked[label] = u;
    j["tracked"] = tracked;
    emit(j);
  }
  while (si < selections.size()) emit(selection_json(selections[si++]));
  ordered_json summary;
  summary["type"] = "summary";
  summary["iterations"] = iterations.size();
  summary["chosen_history"] = chosen_history;
  summary["stop_reason"] = stop_reason;
  emit(summary);
  return out;
}

}  // namespace apt
