#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "apt/encoder.hpp"
#include "apt/graph.hpp"
#include "apt/linalg.hpp"
#include "apt/sampler.hpp"

namespace apt {

struct InfoNceResult {
  std::vector<double> losses;  // per query row, nats
  Matrix grad_queries;         // d(sum of losses) / d queries
  Matrix grad_keys;            // d(sum of losses) / d keys

  [[nodiscard]] double sum() const;
};

// Row i: L_i = -ln softmax_i(q_i . k_j / tau) with keys[i] the positive and
// the other keys as negatives; evaluated with max subtraction.
InfoNceResult info_nce(const Matrix& queries, const Matrix& keys, double tau);

// Settings shared by every loss evaluation on sampled instances.
struct LossContext {
  SamplerParams sampler;
  std::size_t batch_size = 64;
  double tau = 0.07;
  std::size_t threads = 1;
};

// InfoNCE loss of one (query, positive) pair contrasted against the given
// negative keys, under the current parameters. No gradients are kept.
double instance_uncertainty(const ModelParams& params, const InstancePair& pair, const InstanceRefs& negatives,
                            double tau);

struct UncertaintyReport {
  std::vector<double> losses;
  double graph_uncertainty = 0;  // mean of losses
  std::size_t M = 0;
  std::uint64_t seed = 0;
};

// Mean InfoNCE loss over M query instances of g. Queries are drawn in batches
// of ctx.batch_size (batch b on stream (seed, b)); each query's negatives are
// the other keys of its batch.
UncertaintyReport graph_uncertainty(const ModelParams& params, const Graph& g, std::size_t M, std::uint64_t seed,
                                    const LossContext& ctx);

// Diagonal Fisher surrogate with the snapshot it was taken at.
struct FisherDiag {
  std::vector<double> diag;    // >= 0, aligned with ModelParams::flat()
  std::vector<double> anchor;  // parameter snapshot
  std::vector<bool> layer_mask;  // per segment: included in the penalty

  void validate(const ModelParams& params) const;
};

// Mask that selects the first reg_layers message-passing segments.
std::vector<bool> regularized_layers(const ModelParams& params, std::size_t reg_layers);

// F_jj = mean over batches of the squared flat gradient of the batch's summed InfoNCE loss.
FisherDiag fisher_from_batches(const ModelParams& params, std::span<const std::vector<InstancePair>> batches,
                               std::size_t reg_layers, const LossContext& ctx);

// n_samples batches sampled from g (batch b on stream (seed, b)).
FisherDiag fisher_diagonal(const ModelParams& params, const Graph& g, std::size_t n_samples, std::uint64_t seed,
                           std::size_t reg_layers, const LossContext& ctx);

// All-ones diagonal: the proximal term becomes a plain L2 pull toward the anchor.
FisherDiag identity_fisher(const ModelParams& params, std::size_t reg_layers);

struct Penalty {
  double value = 0;
  std::vector<double> grad;
};

// (lambda/2) sum_j F_jj (theta_j - anchor_j)^2 over masked segments, and its gradient.
Penalty proximal_penalty(const ModelParams& params, const FisherDiag& fisher, double lambda);

struct BatchObjective {
  std::vector<double> losses;  // per-instance InfoNCE
  double info_nce = 0;         // sum of losses
  double penalty = 0;
  double total = 0;            // info_nce + penalty
  std::vector<double> grad;    // flat gradient of total
};

// Summed InfoNCE of a batch of positive pairs plus the optional proximal term.
BatchObjective batch_objective(const ModelParams& params, const std::vector<InstancePair>& batch,
                               const FisherDiag* fisher, double lambda, const LossContext& ctx);

// Per-pair InfoNCE losses with in-batch negatives, no gradients.
std::vector<double> batch_losses(const ModelParams& params, const std::vector<InstancePair>& batch,
                                 const LossContext& ctx);

}  // namespace apt
