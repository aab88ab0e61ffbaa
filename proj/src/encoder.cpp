#include "apt/encoder.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "apt/error.hpp"
#include "apt/parallel.hpp"
#include "apt/rng.hpp"

namespace apt {

void EncoderConfig::validate() const {
  require(d_feat > 0 && hidden > 0 && layers > 0 && d_emb > 0, "encoder: all dimensions must be positive");
}

std::vector<std::size_t> EncoderConfig::layer_dims() const {
  std::vector<std::size_t> dims{d_feat};
  dims.insert(dims.end(), layers, hidden);
  dims.push_back(d_emb);
  return dims;
}

ModelParams::ModelParams(const EncoderConfig& config) : config_(config) {
  config.validate();
  std::size_t offset = 0;
  std::size_t in = config.d_feat;
  for (std::size_t l = 0; l <= config.layers; ++l) {
    const std::size_t out = l < config.layers ? config.hidden : config.d_emb;
    segments_.push_back({offset, out, in});
    offset += segments_.back().length();
    in = out;
  }
  flat_.assign(offset, 0.0);
}

ModelParams init_params(const EncoderConfig& config, std::uint64_t seed) {
  ModelParams params(config);
  Rng rng = Rng::derive(seed, {stream::init});
  auto flat = params.flat();
  for (const auto& seg : params.segments()) {
    const double bound = std::sqrt(6.0 / static_cast<double>(seg.rows + seg.cols));
    for (std::size_t i = 0; i < seg.weight_size(); ++i) flat[seg.offset + i] = (2.0 * rng.uniform() - 1.0) * bound;
  }
  return params;
}

InstanceRefs queries_of(const std::vector<InstancePair>& pairs) {
  InstanceRefs out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(&p.query);
  return out;
}

InstanceRefs keys_of(const std::vector<InstancePair>& pairs) {
  InstanceRefs out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(&p.key);
  return out;
}

namespace {

// out(v, :) = h(v, :) + sum_{u in N(v)} h(u, :)
Matrix aggregate(const Graph& g, const Matrix& h) {
  Matrix out = h;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto dst = out.row(v);
    for (NodeId u : g.neighbors(v)) {
      auto src = h.row(u);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
  return out;
}

}  // namespace

std::vector<double> embed_instance(const ModelParams& params, const SubgraphInstance& inst, InstanceTrace* trace) {
  const auto& cfg = params.config();
  const Graph& g = inst.subgraph;
  const std::size_t n = g.num_nodes();
  if (inst.features.rows() != n || inst.features.cols() != cfg.d_feat)
    fail(Errc::invalid_argument, "forward: feature matrix is " + std::to_string(inst.features.rows()) + "x" +
                                     std::to_string(inst.features.cols()) + ", expected " + std::to_string(n) + "x" +
                                     std::to_string(cfg.d_feat));

  InstanceTrace local;
  InstanceTrace& t = trace ? *trace : local;
  t.aggregated.clear();
  t.pre.clear();

  Matrix h = inst.features;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const Segment& seg = params.segments()[l];
    const double* w = params.weights(l);
    const double* b = params.bias(l);
    Matrix agg = aggregate(g, h);
    Matrix z(n, seg.rows);
    for (std::size_t v = 0; v < n; ++v) {
      const auto a = agg.row(v);
      auto zr = z.row(v);
      for (std::size_t o = 0; o < seg.rows; ++o) {
        const double* wr = w + o * seg.cols;
        double s = b[o];
        for (std::size_t i = 0; i < seg.cols; ++i) s += wr[i] * a[i];
        zr[o] = s;
      }
    }
    h = z;
    for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] = std::max(0.0, h.data()[i]);
    t.aggregated.push_back(std::move(agg));
    t.pre.push_back(std::move(z));
  }

  t.pooled.assign(cfg.hidden, 0.0);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t k = 0; k < cfg.hidden; ++k) t.pooled[k] += h(v, k);
  for (auto& x : t.pooled) x /= static_cast<double>(n);
  t.last = std::move(h);

  const Segment& proj = params.segments()[cfg.layers];
  const double* wp = params.weights(cfg.layers);
  const double* bp = params.bias(cfg.layers);
  t.projected.assign(proj.rows, 0.0);
  double sq = 0;
  for (std::size_t o = 0; o < proj.rows; ++o) {
    double s = bp[o];
    for (std::size_t i = 0; i < proj.cols; ++i) s += wp[o * proj.cols + i] * t.pooled[i];
    t.projected[o] = s;
    sq += s * s;
  }
  t.norm = std::sqrt(sq);
  const double denom = std::max(t.norm, kNormGuard);
  t.embedding.resize(proj.rows);
  for (std::size_t o = 0; o < proj.rows; ++o) t.embedding[o] = t.projected[o] / denom;
  return t.embedding;
}

Matrix forward(const ModelParams& params, const InstanceRefs& batch, std::size_t threads,
               std::vector<InstanceTrace>* traces) {
  Matrix out(batch.size(), params.config().d_emb);
  if (traces) traces->assign(batch.size(), InstanceTrace{});
  parallel_for(batch.size(), threads, [&](std::size_t b) {
    const auto e = embed_instance(params, *batch[b], traces ? &(*traces)[b] : nullptr);
    std::copy(e.begin(), e.end(), out.row(b).begin());
  });
  return out;
}

namespace {

void backward_instance(const ModelParams& params, const SubgraphInstance& inst, const InstanceTrace& t,
                       std::span<const double> upstream, std::span<double> grad) {
  const auto& cfg = params.config();
  const Graph& g = inst.subgraph;
  const std::size_t n = g.num_nodes();

  // Normalization Jacobian.
  const std::size_t d = cfg.d_emb;
  std::vector<double> gy(d);
  if (t.norm > kNormGuard) {
    double dot = 0;
    for (std::size_t k = 0; k < d; ++k) dot += t.embedding[k] * upstream[k];
    for (std::size_t k = 0; k < d; ++k) gy[k] = (upstream[k] - t.embedding[k] * dot) / t.norm;
  } else {
    for (std::size_t k = 0; k < d; ++k) gy[k] = upstream[k] / kNormGuard;
  }

  const Segment& proj = params.segments()[cfg.layers];
  const double* wp = params.weights(cfg.layers);
  double* gwp = grad.data() + proj.offset;
  double* gbp = gwp + proj.weight_size();
  std::vector<double> gp(proj.cols, 0.0);
  for (std::size_t o = 0; o < proj.rows; ++o) {
    gbp[o] += gy[o];
    for (std::size_t i = 0; i < proj.cols; ++i) {
      gwp[o * proj.cols + i] += gy[o] * t.pooled[i];
      gp[i] += wp[o * proj.cols + i] * gy[o];
    }
  }

  Matrix gh(n, cfg.hidden);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t k = 0; k < cfg.hidden; ++k) gh(v, k) = gp[k] / static_cast<double>(n);

  for (std::size_t l = cfg.layers; l-- > 0;) {
    const Segment& seg = params.segments()[l];
    const double* w = params.weights(l);
    double* gw = grad.data() + seg.offset;
    double* gb = gw + seg.weight_size();
    const Matrix& z = t.pre[l];
    const Matrix& agg = t.aggregated[l];

    Matrix gz = gh;
    for (std::size_t i = 0; i < gz.size(); ++i)
      if (!(z.data()[i] > 0.0)) gz.data()[i] = 0.0;

    for (std::size_t v = 0; v < n; ++v) {
      const auto gzr = gz.row(v);
      const auto ar = agg.row(v);
      for (std::size_t o = 0; o < seg.rows; ++o) {
        const double go = gzr[o];
        if (go == 0.0) continue;
        gb[o] += go;
        double* gwr = gw + o * seg.cols;
        for (std::size_t i = 0; i < seg.cols; ++i) gwr[i] += go * ar[i];
      }
    }
    if (l == 0) break;

    Matrix gagg(n, seg.cols);
    for (std::size_t v = 0; v < n; ++v) {
      const auto gzr = gz.row(v);
      auto gar = gagg.row(v);
      for (std::size_t o = 0; o < seg.rows; ++o) {
        const double go = gzr[o];
        if (go == 0.0) continue;
        const double* wr = w + o * seg.cols;
        for (std::size_t i = 0; i < seg.cols; ++i) gar[i] += go * wr[i];
      }
    }
    // The aggregation matrix (I + A) is symmetric, so its transpose is itself.
    gh = aggregate(g, gagg);
  }
}

}  // namespace

std::vector<double> backward(const ModelParams& params, const InstanceRefs& batch, const Matrix& upstream,
                             std::size_t threads, const std::vector<InstanceTrace>* traces) {
  if (upstream.rows() != batch.size() || upstream.cols() != params.config().d_emb)
    fail(Errc::invalid_argument, "backward: upstream gradient shape does not match the embedding batch");
  if (traces && traces->size() != batch.size()) fail(Errc::invalid_argument, "backward: trace count mismatch");

  std::vector<std::vector<double>> per(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t b) {
    per[b].assign(params.size(), 0.0);
    InstanceTrace fresh;
    const InstanceTrace* t = traces ? &(*traces)[b] : nullptr;
    if (!t) {
      embed_instance(params, *batch[b], &fresh);
      t = &fresh;
    }
    backward_instance(params, *batch[b], *t, upstream.row(b), per[b]);
  });

  std::vector<double> grad(params.size(), 0.0);
  for (const auto& p : per)
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += p[j];
  return grad;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

}  // namespace

std::string checkpoint_text(const ModelParams& params, const CheckpointMeta& meta) {
  const auto& cfg = params.config();
  std::ostringstream os;
  os << "# apt encoder checkpoint\n";
  os << "format_version " << kCheckpointVersion << '\n';
  os << "d_feat " << cfg.d_feat << '\n';
  os << "layer_dims";
  for (auto d : cfg.layer_dims()) os << ' ' << d;
  os << '\n';
  os << "iteration " << meta.iteration << '\n';
  for (const auto& [k, v] : meta.extra) os << "meta." << k << ' ' << v << '\n';
  os << "num_params " << params.size() << '\n';
  os << "params\n";
  for (double x : params.flat()) os << format_double(x) << '\n';
  os << "end\n";
  return os.str();
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot write checkpoint: " + path.string());
  out << checkpoint_text(params, meta);
  if (!out) fail(Errc::io, "write failed: " + path.string());
}

namespace {

template <class T>
T parse_number(std::string_view s, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    fail(Errc::format, std::string("checkpoint: bad ") + what + " value '" + std::string(s) + "'");
  return value;
}

}  // namespace

Checkpoint parse_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CheckpointMeta meta;
  std::vector<std::size_t> dims;
  std::size_t d_feat = 0;
  std::size_t num_params = 0;
  bool have_version = false, have_count = false, in_params = false, ended = false;
  std::vector<double> values;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (in_params) {
      if (line == "end") {
        ended = true;
        break;
      }
      values.push_back(parse_number<double>(line, "parameter"));
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    const auto sp = line.find(' ');
    const std::string key = line.substr(0, sp);
    const std::string rest = sp == std::string::npos ? "" : line.substr(sp + 1);
    if (key == "format_version") {
      meta.format_version = parse_number<int>(rest, "format_version");
      have_version = true;
      if (meta.format_version != kCheckpointVersion)
        fail(Errc::version, "checkpoint format_version " + rest + " is not supported (expected " +
                                std::to_string(kCheckpointVersion) + ")");
    } else if (key == "d_feat") {
      d_feat = parse_number<std::size_t>(rest, "d_feat");
    } else if (key == "layer_dims") {
      std::istringstream ds(rest);
      std::string tok;
      while (ds >> tok) dims.push_back(parse_number<std::size_t>(tok, "layer_dims"));
    } else if (key == "iteration") {
      meta.iteration = parse_number<std::uint64_t>(rest, "iteration");
    } else if (key == "num_params") {
      num_params = parse_number<std::size_t>(rest, "num_params");
      have_count = true;
    } else if (key.rfind("meta.", 0) == 0) {
      meta.extra[key.substr(5)] = rest;
    } else if (key == "params") {
      in_params = true;
    } else {
      fail(Errc::format, "checkpoint: unknown key '" + key + "'");
    }
  }
  if (!have_version) fail(Errc::format, "checkpoint: missing format_version");
  if (dims.size() < 3) fail(Errc::format, "checkpoint: layer_dims needs at least three entries");
  for (std::size_t i = 2; i + 1 < dims.size(); ++i)
    if (dims[i] != dims[1]) fail(Errc::format, "checkpoint: hidden layers must share one width");
  if (d_feat != dims.front()) fail(Errc::format, "checkpoint: d_feat disagrees with layer_dims");
  if (!have_count || !in_params) fail(Errc::format, "checkpoint: missing parameter block");

  EncoderConfig cfg;
  cfg.d_feat = dims.front();
  cfg.hidden = dims[1];
  cfg.layers = dims.size() - 2;
  cfg.d_emb = dims.back();
  for (auto d : dims)
    if (d == 0) fail(Errc::format, "checkpoint: zero layer width");
  Checkpoint ck{ModelParams(cfg), meta};
  if (num_params != ck.params.size())
    fail(Errc::format, "checkpoint: num_params " + std::to_string(num_params) + " does not match layer_dims (" +
                           std::to_string(ck.params.size()) + ")");
  if (!ended || values.size() != num_params)
    fail(Errc::format, "checkpoint: expected " + std::to_string(num_params) + " parameters, found " +
                           std::to_string(values.size()) + (ended ? "" : " (file truncated)"));
  std::copy(values.begin(), values.end(), ck.params.flat().begin());
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open checkpoint: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_checkpoint(buffer.str());
}

}  // namespace apt
