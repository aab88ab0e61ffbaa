#include "apt/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "apt/error.hpp"
#include "apt/rng.hpp"

namespace apt {

double InfoNceResult::sum() const { return std::accumulate(losses.begin(), losses.end(), 0.0); }

InfoNceResult info_nce(const Matrix& queries, const Matrix& keys, double tau) {
  const std::size_t batch = queries.rows();
  const std::size_t dim = queries.cols();
  require(batch >= 2, "info_nce: batch size must be >= 2");
  require(keys.rows() == batch && keys.cols() == dim, "info_nce: query and key batches differ in shape");
  require(tau > 0.0, "info_nce: temperature must be positive");

  InfoNceResult r;
  r.losses.resize(batch);
  r.grad_queries = Matrix(batch, dim);
  r.grad_keys = Matrix(batch, dim);
  std::vector<double> logits(batch), prob(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const auto q = queries.row(i);
    for (std::size_t j = 0; j < batch; ++j) {
      const auto k = keys.row(j);
      double s = 0;
      for (std::size_t c = 0; c < dim; ++c) s += q[c] * k[c];
      logits[j] = s / tau;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0;
    for (std::size_t j = 0; j < batch; ++j) {
      prob[j] = std::exp(logits[j] - mx);
      z += prob[j];
    }
    r.losses[i] = std::log(z) + mx - logits[i];
    for (std::size_t j = 0; j < batch; ++j) prob[j] /= z;

    // dL_i/dlogit_ij = p_ij - [i == j]
    auto gq = r.grad_queries.row(i);
    for (std::size_t j = 0; j < batch; ++j) {
      const double coeff = (prob[j] - (i == j ? 1.0 : 0.0)) / tau;
      const auto k = keys.row(j);
      auto gk = r.grad_keys.row(j);
      for (std::size_t c = 0; c < dim; ++c) {
        gq[c] += coeff * k[c];
        gk[c] += coeff * q[c];
      }
    }
  }
  return r;
}

double instance_uncertainty(const ModelParams& params, const InstancePair& pair, const InstanceRefs& negatives,
                            double tau) {
  require(!negatives.empty(), "instance_uncertainty: need at least one negative key");
  require(tau > 0.0, "instance_uncertainty: temperature must be positive");
  const auto q = embed_instance(params, pair.query);
  InstanceRefs keys{&pair.key};
  keys.insert(keys.end(), negatives.begin(), negatives.end());
  const Matrix k = forward(params, keys);
  std::vector<double> logits(keys.size());
  for (std::size_t j = 0; j < keys.size(); ++j) {
    double s = 0;
    for (std::size_t c = 0; c < q.size(); ++c) s += q[c] * k(j, c);
    logits[j] = s / tau;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (double l : logits) z += std::exp(l - mx);
  return std::log(z) + mx - logits[0];
}

std::vector<double> batch_losses(const ModelParams& params, const std::vector<InstancePair>& batch,
                                 const LossContext& ctx) {
  const Matrix q = forward(params, queries_of(batch), ctx.threads);
  const Matrix k = forward(params, keys_of(batch), ctx.threads);
  return info_nce(q, k, ctx.tau).losses;
}

UncertaintyReport graph_uncertainty(const ModelParams& params, const Graph& g, std::size_t M, std::uint64_t seed,
                                    const LossContext& ctx) {
  require(M >= 1, "graph_uncertainty: M must be >= 1");
  UncertaintyReport report;
  report.M = M;
  report.seed = seed;
  for (std::uint64_t b = 0; report.losses.size() < M; ++b) {
    Rng rng = Rng::derive(seed, {b});
    const auto batch = sample_batch(g, ctx.batch_size, ctx.sampler, rng, ctx.threads);
    const auto losses = batch_losses(params, batch, ctx);
    for (double l : losses) {
      if (report.losses.size() == M) break;
      report.losses.push_back(l);
    }
  }
  report.graph_uncertainty =
      std::accumulate(report.losses.begin(), report.losses.end(), 0.0) / static_cast<double>(M);
  return report;
}

void FisherDiag::validate(const ModelParams& params) const {
  if (diag.size() != params.size() || anchor.size() != params.size() ||
      layer_mask.size() != params.segments().size())
    fail(Errc::invalid_argument, "Fisher diagonal does not match the parameter layout");
}

std::vector<bool> regularized_layers(const ModelParams& params, std::size_t reg_layers) {
  std::vector<bool> mask(params.segments().size(), false);
  const std::size_t n = std::min(reg_layers, params.config().layers);
  for (std::size_t l = 0; l < n; ++l) mask[l] = true;
  return mask;
}

BatchObjective batch_objective(const ModelParams& params, const std::vector<InstancePair>& batch,
                               const FisherDiag* fisher, double lambda, const LossContext& ctx) {
  const auto qs = queries_of(batch);
  const auto ks = keys_of(batch);
  std::vector<InstanceTrace> qt, kt;
  const Matrix q = forward(params, qs, ctx.threads, &qt);
  const Matrix k = forward(params, ks, ctx.threads, &kt);
  const InfoNceResult nce = info_nce(q, k, ctx.tau);

  BatchObjective out;
  out.losses = nce.losses;
  out.info_nce = nce.sum();
  out.grad = backward(params, qs, nce.grad_queries, ctx.threads, &qt);
  const auto gk = backward(params, ks, nce.grad_keys, ctx.threads, &kt);
  for (std::size_t j = 0; j < out.grad.size(); ++j) out.grad[j] += gk[j];

  if (fisher && lambda != 0.0) {
    const Penalty pen = proximal_penalty(params, *fisher, lambda);
    out.penalty = pen.value;
    for (std::size_t j = 0; j < out.grad.size(); ++j) out.grad[j] += pen.grad[j];
  }
  out.total = out.info_nce + out.penalty;
  return out;
}

FisherDiag fisher_from_batches(const ModelParams& params, std::span<const std::vector<InstancePair>> batches,
                               std::size_t reg_layers, const LossContext& ctx) {
  require(!batches.empty(), "fisher: need at least one batch");
  FisherDiag f;
  f.diag.assign(params.size(), 0.0);
  for (const auto& batch : batches) {
    const auto obj = batch_objective(params, batch, nullptr, 0.0, ctx);
    for (std::size_t j = 0; j < f.diag.size(); ++j) f.diag[j] += obj.grad[j] * obj.grad[j];
  }
  for (auto& x : f.diag) x /= static_cast<double>(batches.size());
  f.anchor.assign(params.flat().begin(), params.flat().end());
  f.layer_mask = regularized_layers(params, reg_layers);
  return f;
}

FisherDiag fisher_diagonal(const ModelParams& params, const Graph& g, std::size_t n_samples, std::uint64_t seed,
                           std::size_t reg_layers, const LossContext& ctx) {
  require(n_samples >= 1, "fisher: n_samples must be >= 1");
  std::vector<std::vector<InstancePair>> batches;
  batches.reserve(n_samples);
  for (std::uint64_t b = 0; b < n_samples; ++b) {
    Rng rng = Rng::derive(seed, {b});
    batches.push_back(sample_batch(g, ctx.batch_size, ctx.sampler, rng, ctx.threads));
  }
  return fisher_from_batches(params, batches, reg_layers, ctx);
}

FisherDiag identity_fisher(const ModelParams& params, std::size_t reg_layers) {
  FisherDiag f;
  f.diag.assign(params.size(), 1.0);
  f.anchor.assign(params.flat().begin(), params.flat().end());
  f.layer_mask = regularized_layers(params, reg_layers);
  return f;
}

Penalty proximal_penalty(const ModelParams& params, const FisherDiag& fisher, double lambda) {
  fisher.validate(params);
  Penalty p;
  p.grad.assign(params.size(), 0.0);
  const auto theta = params.flat();
  double acc = 0;
  for (std::size_t s = 0; s < params.segments().size(); ++s) {
    if (!fisher.layer_mask[s]) continue;
    const auto& seg = params.segments()[s];
    for (std::size_t j = seg.offset; j < seg.offset + seg.length(); ++j) {
      const double diff = theta[j] - fisher.anchor[j];
      acc += fisher.diag[j] * diff * diff;
      p.grad[j] = lambda * fisher.diag[j] * diff;
    }
  }
  p.value = 0.5 * lambda * acc;
  return p;
}

}  // namespace apt
