#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apt/encoder.hpp"
#include "apt/graph.hpp"
#include "apt/objective.hpp"
#include "apt/sampler.hpp"
#include "apt/selector.hpp"

namespace apt {

enum class Variant {
  apt,     // Fisher-weighted proximal term
  apt_l2,  // identity Fisher (plain L2 pull)
  apt_r,   // no proximal term
  apt_g,   // selection without the property term
  apt_p,   // selection without the uncertainty term
};

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct OptimizerConfig {
  std::string kind = "adam";  // "adam" or "sgd"
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction, step k = 1, 2, ...:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   theta <- theta - lr * (m / (1 - b1^k)) / (sqrt(v / (1 - b2^k)) + eps)
// kind "sgd" is theta <- theta - lr g.
class Optimizer {
 public:
  Optimizer(std::size_t n, OptimizerConfig config);
  void step(std::span<double> params, std::span<const double> grad);
  [[nodiscard]] std::size_t steps() const noexcept { return steps_; }

 private:
  OptimizerConfig config_;
  std::vector<double> m_, v_;
  std::size_t steps_ = 0;
};

struct TrainConfig {
  SelectionConfig selection;
  EncoderConfig encoder;
  SamplerParams sampler;
  OptimizerConfig optimizer;
  std::optional<double> lambda;  // unset: 500 for apt/apt_g/apt_p, 10 for apt_l2, 0 for apt_r
  std::size_t reg_layers = 2;
  Variant variant = Variant::apt;
  std::size_t batch_size = 64;
  double tau = 0.07;
  std::uint64_t seed = 0;
  std::size_t fisher_batches = 16;
  std::size_t threads = 1;
  std::size_t track_M = 0;  // >0: log uncertainty of earlier graphs each iteration
  bool keep_snapshots = false;
  double divergence_limit = 50.0;  // mean per-instance InfoNCE that aborts the run

  void validate() const;
  [[nodiscard]] double effective_lambda() const;
  [[nodiscard]] LossContext loss_context() const;
};

struct IterationRecord {
  std::size_t t = 0;
  std::string graph;
  std::size_t epochs_on_graph = 0;
  std::size_t candidates = 0;
  std::size_t kept = 0;
  double mean_loss = 0;     // mean per-instance InfoNCE over the epoch
  double penalty = 0;       // mean proximal penalty per batch
  double total = 0;         // mean batch total (InfoNCE + penalty)
  std::optional<double> uncertainty;  // current graph after the epoch
  double gamma = 1.0;       // gamma in force when this graph was chosen
  std::vector<double> batch_info_nce, batch_penalty, batch_total;
  std::vector<std::pair<std::string, double>> tracked;  // earlier graphs' uncertainty
};

struct RunLog {
  std::vector<SelectionEvent> selections;
  std::vector<IterationRecord> iterations;
  std::vector<std::string> chosen_history;
  std::string stop_reason;
  double wall_seconds = 0;  // not part of the serialized log

  // JSON lines: selection and iteration records in event order, then a summary.
  [[nodiscard]] std::string to_jsonl() const;
};

struct PretrainResult {
  ModelParams params;
  RunLog log;
  std::vector<ModelParams> snapshots;  // after each iteration, when keep_snapshots
};

// Called after a graph is chosen, before training on it.
using SelectionCallback = std::function<void(const SelectionEvent&, const ModelParams&)>;

struct EpochResult {
  double mean_loss = 0;
  double mean_penalty = 0;
  double mean_total = 0;
  std::vector<double> batch_info_nce, batch_penalty, batch_total;
};

// One pass over `pairs` in batches of batch_size (a trailing single pair is
// dropped); each batch takes one optimizer step on InfoNCE + proximal term.
// Throws Error{numerical} on a non-finite loss or one above divergence_limit.
EpochResult train_epoch(ModelParams& params, Optimizer& optimizer, const std::vector<InstancePair>& pairs,
                        const FisherDiag* fisher, double lambda, const TrainConfig& config);

// Graph selection loop: choose by properties, then per iteration sample
// candidates, filter by T_s, train one epoch, and on a switch snapshot the
// proximal anchor, update gamma and choose again, until T iterations or the
// pool is exhausted.
PretrainResult pretrain(const std::vector<Graph>& pool, const TrainConfig& config,
                        const SelectionCallback& on_select = {});

enum class BaselineMode { all_graphs_uniform, random_order, reverse_order };
const char* to_string(BaselineMode m);
BaselineMode baseline_from_string(const std::string& s);

// all_graphs_uniform: every batch from a uniformly drawn graph, no filtering,
// no proximal term, no switching. random_order / reverse_order: the same loop
// as pretrain but graphs are taken from `order` (pool order when empty)
// shuffled or reversed instead of scored.
PretrainResult pretrain_baseline(const std::vector<Graph>& pool, const TrainConfig& config, BaselineMode mode,
                                 std::vector<std::string> order = {}, const SelectionCallback& on_select = {});

// graph_uncertainty of g under each checkpoint, all with the same seed.
std::vector<double> forgetting_probe(const std::vector<ModelParams>& checkpoints, const Graph& g, std::size_t M,
                                     std::uint64_t seed, const LossContext& ctx);

}  // namespace apt
