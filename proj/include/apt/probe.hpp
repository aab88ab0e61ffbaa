#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "apt/encoder.hpp"
#include "apt/graph.hpp"
#include "apt/linalg.hpp"
#include "apt/sampler.hpp"

namespace apt {

// One RWR instance per node on stream (seed, embed, original id), encoded with
// frozen parameters. Row v is node v's unit-norm embedding.
Matrix embed_nodes(const ModelParams& params, const Graph& g, const SamplerParams& sampler, std::uint64_t seed,
                   std::size_t threads = 1);

// Mean of n_instances embeddings of instances around uniformly drawn egos,
// renormalized to unit length.
std::vector<double> embed_graph(const ModelParams& params, const Graph& g, std::size_t n_instances,
                                const SamplerParams& sampler, std::uint64_t seed);

struct ProbeConfig {
  std::size_t n_splits = 10;
  double test_frac = 0.1;
  std::size_t steps = 500;
  double lr = 0.1;
  double weight_decay = 1e-4;
  std::size_t max_redraws = 100;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

struct ProbeResult {
  double mean = 0;  // micro-F1
  double std = 0;   // population std over splits
  std::size_t n_splits = 0;
  double test_frac = 0;
  std::uint64_t seed = 0;
  std::vector<double> split_scores;
};

// Multinomial logistic regression (softmax, bias unpenalized) fitted by
// full-batch gradient descent on mean cross-entropy + (wd/2)|W|^2, scored by
// micro-F1 on held-out random splits. Labels are class indices 0..K-1.
// A split whose training part misses a class is redrawn.
ProbeResult logistic_probe(const Matrix& embeddings, std::span<const int> labels, const ProbeConfig& config);

// Trained softmax classifier: weights is K x (d + 1), last column the bias.
Matrix fit_logistic(const Matrix& x, std::span<const int> y, std::size_t n_classes, const ProbeConfig& config);
std::vector<int> predict_logistic(const Matrix& weights, const Matrix& x);

double micro_f1(std::span<const int> predictions, std::span<const int> labels);
double accuracy(std::span<const int> predictions, std::span<const int> labels);

double pearson(std::span<const double> x, std::span<const double> y);
// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct NodeLabels {
  std::vector<NodeId> nodes;  // local ids in g, in file order
  std::vector<int> classes;   // class index per entry
  std::vector<std::string> class_names;  // index -> label text, sorted
};

// "node_id label" lines keyed by original node id; '#' comments allowed.
// Throws Error{parse} on malformed lines, duplicates or ids not in g.
NodeLabels load_labels(const std::filesystem::path& path, const Graph& g);
NodeLabels parse_labels(const std::string& text, const Graph& g);

}  // namespace apt
