#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "apt/linalg.hpp"
#include "apt/sampler.hpp"

namespace apt {

struct EncoderConfig {
  std::size_t d_feat = 32;
  std::size_t hidden = 64;
  std::size_t layers = 3;  // message-passing layers
  std::size_t d_emb = 64;

  void validate() const;
  // d_feat, hidden x layers, d_emb
  [[nodiscard]] std::vector<std::size_t> layer_dims() const;
  bool operator==(const EncoderConfig&) const = default;
};

// One contiguous block of the flat parameter vector: a rows x cols weight
// matrix (row-major, rows = output width) followed by a bias of length rows.
struct Segment {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  [[nodiscard]] std::size_t weight_size() const noexcept { return rows * cols; }
  [[nodiscard]] std::size_t length() const noexcept { return rows * cols + rows; }
  bool operator==(const Segment&) const = default;
};

// Flat parameter store. Segments 0..layers-1 are the message-passing layers,
// segment `layers` is the output projection; together they tile the flat
// vector exactly.
class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(const EncoderConfig& config);

  [[nodiscard]] const EncoderConfig& config() const noexcept { return config_; }
  [[nodiscard]] const std::vector<Segment>& segments() const noexcept { return segments_; }
  [[nodiscard]] std::span<const double> flat() const noexcept { return flat_; }
  std::span<double> flat() noexcept { return flat_; }
  [[nodiscard]] std::size_t size() const noexcept { return flat_.size(); }

  [[nodiscard]] const double* weights(std::size_t layer) const { return flat_.data() + segments_[layer].offset; }
  [[nodiscard]] const double* bias(std::size_t layer) const {
    return flat_.data() + segments_[layer].offset + segments_[layer].weight_size();
  }

  bool operator==(const ModelParams&) const = default;

 private:
  EncoderConfig config_;
  std::vector<Segment> segments_;
  std::vector<double> flat_;
};

// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
ModelParams init_params(const EncoderConfig& config, std::uint64_t seed);

// Intermediate values of one instance's forward pass, kept for backward.
struct InstanceTrace {
  std::vector<Matrix> aggregated;  // per layer: h + sum of neighbor h (layer input)
  std::vector<Matrix> pre;         // per layer: pre-activation
  Matrix last;                     // output of the final message-passing layer
  std::vector<double> pooled;
  std::vector<double> projected;
  double norm = 0;
  std::vector<double> embedding;
};

using InstanceRefs = std::vector<const SubgraphInstance*>;

InstanceRefs queries_of(const std::vector<InstancePair>& pairs);
InstanceRefs keys_of(const std::vector<InstancePair>& pairs);

inline constexpr double kNormGuard = 1e-12;

// Per layer h' = ReLU(W (h_v + sum_{u in N(v)} h_u) + b); mean pool; linear
// projection; divide by max(||y||, 1e-12). Returns a B x d_emb matrix.
// Traces are filled when requested.
Matrix forward(const ModelParams& params, const InstanceRefs& batch, std::size_t threads = 1,
               std::vector<InstanceTrace>* traces = nullptr);

std::vector<double> embed_instance(const ModelParams& params, const SubgraphInstance& inst,
                                   InstanceTrace* trace = nullptr);

// Gradient of sum_{b,k} upstream(b, k) * embedding(b, k) with respect to the
// flat parameters. Per-instance gradients are summed in batch order. Traces
// from a matching forward call are reused when given.
std::vector<double> backward(const ModelParams& params, const InstanceRefs& batch, const Matrix& upstream,
                             std::size_t threads = 1, const std::vector<InstanceTrace>* traces = nullptr);

struct CheckpointMeta {
  int format_version = 1;
  std::uint64_t iteration = 0;
  std::map<std::string, std::string> extra;  // free-form "meta.<key>" lines
};

inline constexpr int kCheckpointVersion = 1;

// Text key-value checkpoint; parameters are written one per line with 17
// significant digits, which round-trips doubles exactly.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const CheckpointMeta& meta);
std::string checkpoint_text(const ModelParams& params, const CheckpointMeta& meta);

struct Checkpoint {
  ModelParams params;
  CheckpointMeta meta;
};

// Throws Error{version} for an unsupported format_version and Error{format}
// for a malformed or truncated file.
Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint parse_checkpoint(const std::string& text);

}  // namespace apt
