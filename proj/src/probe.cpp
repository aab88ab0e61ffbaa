#include "apt/probe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "apt/error.hpp"
#include "apt/parallel.hpp"
#include "apt/rng.hpp"

namespace apt {

Matrix embed_nodes(const ModelParams& params, const Graph& g, const SamplerParams& sampler, std::uint64_t seed,
                   std::size_t threads) {
  const std::size_t n = g.num_nodes();
  Matrix out(n, params.config().d_emb);
  parallel_for(n, threads, [&](std::size_t v) {
    Rng rng = Rng::derive(seed, {stream::embed, g.original_id(static_cast<NodeId>(v))});
    const auto inst = make_instance(g, static_cast<NodeId>(v), sampler, rng);
    const auto e = embed_instance(params, inst);
    std::copy(e.begin(), e.end(), out.row(v).begin());
  });
  return out;
}

std::vector<double> embed_graph(const ModelParams& params, const Graph& g, std::size_t n_instances,
                                const SamplerParams& sampler, std::uint64_t seed) {
  require(n_instances >= 1, "embed_graph: n_instances must be >= 1");
  require(g.num_nodes() >= 1, "embed_graph: empty graph");
  std::vector<double> mean(params.config().d_emb, 0.0);
  Rng ego_rng = Rng::derive(seed, {stream::embed});
  for (std::size_t i = 0; i < n_instances; ++i) {
    const auto ego = static_cast<NodeId>(ego_rng.below(g.num_nodes()));
    Rng rng = Rng::derive(seed, {stream::embed, i + 1});
    const auto e = embed_instance(params, make_instance(g, ego, sampler, rng));
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += e[c];
  }
  double norm = 0;
  for (double x : mean) norm += x * x;
  norm = std::max(std::sqrt(norm), kNormGuard);
  for (auto& x : mean) x /= norm;
  return mean;
}

void ProbeConfig::validate() const {
  require(n_splits >= 1, "probe: n_splits must be >= 1");
  require(test_frac > 0.0 && test_frac < 1.0, "probe: test_frac must be in (0, 1)");
  require(lr > 0.0, "probe: lr must be positive");
  require(weight_decay >= 0.0, "probe: weight_decay must be >= 0");
}

Matrix fit_logistic(const Matrix& x, std::span<const int> y, std::size_t n_classes, const ProbeConfig& config) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  require(n == y.size() && n >= 1, "fit_logistic: need one label per row");
  Matrix w(n_classes, d + 1);
  Matrix grad(n_classes, d + 1);
  std::vector<double> logits(n_classes);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t step = 0; step < config.steps; ++step) {
    std::fill(grad.data(), grad.data() + grad.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = x.row(i);
      for (std::size_t k = 0; k < n_classes; ++k) {
        const auto wk = w.row(k);
        double s = wk[d];
        for (std::size_t c = 0; c < d; ++c) s += wk[c] * xi[c];
        logits[k] = s;
      }
      const double mx = *std::max_element(logits.begin(), logits.end());
      double z = 0;
      for (auto& l : logits) z += (l = std::exp(l - mx));
      for (std::size_t k = 0; k < n_classes; ++k) {
        const double r = (logits[k] / z - (static_cast<std::size_t>(y[i]) == k ? 1.0 : 0.0)) * inv_n;
        auto gk = grad.row(k);
        for (std::size_t c = 0; c < d; ++c) gk[c] += r * xi[c];
        gk[d] += r;
      }
    }
    for (std::size_t k = 0; k < n_classes; ++k) {
      auto wk = w.row(k);
      const auto gk = grad.row(k);
      for (std::size_t c = 0; c < d; ++c) wk[c] -= config.lr * (gk[c] + config.weight_decay * wk[c]);
      wk[d] -= config.lr * gk[d];
    }
  }
  return w;
}

std::vector<int> predict_logistic(const Matrix& weights, const Matrix& x) {
  const std::size_t d = weights.cols() - 1;
  require(x.cols() == d, "predict_logistic: feature width mismatch");
  std::vector<int> pred(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < weights.rows(); ++k) {
      const auto wk = weights.row(k);
      double s = wk[d];
      for (std::size_t c = 0; c < d; ++c) s += wk[c] * x(i, c);
      if (s > best) {
        best = s;
        pred[i] = static_cast<int>(k);
      }
    }
  }
  return pred;
}

namespace {

Matrix take_rows(const Matrix& x, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) std::copy(x.row(idx[i]).begin(), x.row(idx[i]).end(), out.row(i).begin());
  return out;
}

}  // namespace

ProbeResult logistic_probe(const Matrix& embeddings, std::span<const int> labels, const ProbeConfig& config) {
  config.validate();
  const std::size_t n = embeddings.rows();
  require(labels.size() == n, "probe: one label per embedding row required");
  for (int c : labels) require(c >= 0, "probe: class indices must be >= 0");
  const std::size_t n_classes = n == 0 ? 0 : static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
  std::vector<std::size_t> counts(n_classes, 0);
  for (int c : labels) ++counts[static_cast<std::size_t>(c)];
  const auto present = static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
  if (present < 2) fail(Errc::invalid_argument, "probe: at least two classes are required");

  const auto n_test = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.test_frac * static_cast<double>(n))));
  require(n_test < n, "probe: too few samples for a train/test split");

  ProbeResult r;
  r.n_splits = config.n_splits;
  r.test_frac = config.test_frac;
  r.seed = config.seed;
  r.split_scores.assign(config.n_splits, 0.0);
  parallel_for(config.n_splits, config.threads, [&](std::size_t s) {
    std::vector<std::size_t> perm(n);
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt == config.max_redraws)
        fail(Errc::invalid_argument, "probe: could not draw a split whose training part holds every class");
      std::iota(perm.begin(), perm.end(), 0);
      Rng rng = Rng::derive(config.seed, {stream::probe_split, s, attempt});
      for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
      std::vector<std::size_t> seen(n_classes, 0);
      for (std::size_t i = n_test; i < n; ++i) ++seen[static_cast<std::size_t>(labels[perm[i]])];
      bool ok = true;
      for (std::size_t k = 0; k < n_classes; ++k) ok = ok && (counts[k] == 0 || seen[k] > 0);
      if (ok) break;
    }
    const std::span<const std::size_t> test(perm.data(), n_test);
    const std::span<const std::size_t> train(perm.data() + n_test, n - n_test);
    std::vector<int> y_train, y_test;
    for (auto i : train) y_train.push_back(labels[i]);
    for (auto i : test) y_test.push_back(labels[i]);
    const Matrix w = fit_logistic(take_rows(embeddings, train), y_train, n_classes, config);
    r.split_scores[s] = micro_f1(predict_logistic(w, take_rows(embeddings, test)), y_test);
  });
  const double k = static_cast<double>(config.n_splits);
  r.mean = std::accumulate(r.split_scores.begin(), r.split_scores.end(), 0.0) / k;
  double var = 0;
  for (double x : r.split_scores) var += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(var / k);
  return r;
}

double micro_f1(std::span<const int> predictions, std::span<const int> labels) {
  require(predictions.size() == labels.size(), "micro_f1: length mismatch");
  require(!labels.empty(), "micro_f1: empty input");
  // Pooled over classes: every error is one false positive and one false negative.
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] == labels[i]) {
      ++tp;
    } else {
      ++fp;
      ++fn;
    }
  }
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  require(predictions.size() == labels.size() && !labels.empty(), "accuracy: length mismatch");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) ok += predictions[i] == labels[i];
  return static_cast<double>(ok) / static_cast<double>(labels.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "pearson: need two equal-length series of length >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) fail(Errc::numerical, "pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "spearman: need two equal-length series of length >= 2");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

NodeLabels parse_labels(const std::string& text, const Graph& g) {
  std::unordered_map<std::uint64_t, NodeId> local;
  for (NodeId v = 0; v < g.num_nodes(); ++v) local.emplace(g.original_id(v), v);

  std::vector<std::pair<NodeId, std::string>> rows;
  std::vector<bool> seen(g.num_nodes(), false);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string id_tok, label, extra;
    if (!(ls >> id_tok) || id_tok[0] == '#') continue;
    const auto where = "labels line " + std::to_string(lineno) + ": ";
    if (!(ls >> label) || (ls >> extra)) fail(Errc::parse, where + "expected 'node_id label'");
    std::uint64_t id = 0;
    const auto [p, ec] = std::from_chars(id_tok.data(), id_tok.data() + id_tok.size(), id);
    if (ec != std::errc() || p != id_tok.data() + id_tok.size()) fail(Errc::parse, where + "bad node id '" + id_tok + "'");
    const auto it = local.find(id);
    if (it == local.end()) fail(Errc::parse, where + "node " + id_tok + " is not in the graph");
    if (seen[it->second]) fail(Errc::parse, where + "node " + id_tok + " labeled twice");
    seen[it->second] = true;
    rows.emplace_back(it->second, label);
  }
  NodeLabels out;
  std::map<std::string, int> index;
  for (const auto& [v, label] : rows) index.emplace(label, 0);
  for (auto& [label, k] : index) {
    k = static_cast<int>(out.class_names.size());
    out.class_names.push_back(label);
  }
  for (const auto& [v, label] : rows) {
    out.nodes.push_back(v);
    out.classes.push_back(index.at(label));
  }
  return out;
}

NodeLabels load_labels(const std::filesystem::path& path, const Graph& g) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot read label file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_labels(ss.str(), g);
}

}  // namespace apt
