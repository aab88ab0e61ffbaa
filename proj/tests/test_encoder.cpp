#include <doctest.h>

#include <cmath>
#include <numeric>

#include "apt/encoder.hpp"
#include "support.hpp"

using namespace apt;
using namespace testing;

namespace {

EncoderConfig small_config(std::size_t d_feat = 8) {
  EncoderConfig c;
  c.d_feat = d_feat;
  c.hidden = 6;
  c.layers = 2;
  c.d_emb = 5;
  return c;
}

SubgraphInstance instance_on(const Graph& g, NodeId anchor, std::size_t d_feat) {
  SubgraphInstance inst;
  inst.subgraph = g;
  inst.anchor = anchor;
  inst.features = build_features(g, anchor, d_feat);
  return inst;
}

std::vector<SubgraphInstance> random_instances(std::size_t count, std::size_t d_feat, Rng& gen) {
  std::vector<SubgraphInstance> out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto g = random_connected(1 + gen.below(9), 0.3, gen);
    out.push_back(instance_on(g, static_cast<NodeId>(gen.below(g.num_nodes())), d_feat));
  }
  return out;
}

InstanceRefs refs(const std::vector<SubgraphInstance>& v) {
  InstanceRefs r;
  for (const auto& x : v) r.push_back(&x);
  return r;
}

}  // namespace

TEST_CASE("parameter layout tiles the flat vector") {
  const auto cfg = small_config();
  const ModelParams p(cfg);
  CHECK(cfg.layer_dims() == std::vector<std::size_t>{8, 6, 6, 5});
  std::size_t offset = 0;
  for (const auto& s : p.segments()) {
    CHECK(s.offset == offset);
    offset += s.length();
  }
  CHECK(offset == p.size());
  CHECK(p.segments().size() == 3);
  CHECK(p.size() == (6 * 8 + 6) + (6 * 6 + 6) + (5 * 6 + 5));
}

TEST_CASE("initialization follows the Glorot bound") {
  const auto p = init_params(small_config(), 3);
  for (const auto& s : p.segments()) {
    const double bound = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    for (std::size_t i = 0; i < s.weight_size(); ++i) CHECK(std::abs(p.flat()[s.offset + i]) <= bound);
    for (std::size_t i = 0; i < s.rows; ++i) CHECK(p.flat()[s.offset + s.weight_size() + i] == 0.0);
  }
  CHECK(init_params(small_config(), 3) == p);
  CHECK_FALSE(init_params(small_config(), 4) == p);
}

TEST_CASE("embeddings have unit norm") {
  Rng gen(1);
  const auto p = init_params(small_config(), 9);
  const auto inst = random_instances(30, 8, gen);
  const auto emb = forward(p, refs(inst));
  REQUIRE(emb.rows() == 30);
  REQUIRE(emb.cols() == 5);
  for (std::size_t r = 0; r < emb.rows(); ++r) {
    double n = 0;
    for (double v : emb.row(r)) n += v * v;
    CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-12);
  }
}

TEST_CASE("node relabeling does not change the embedding") {
  Rng gen(17);
  const auto p = init_params(small_config(), 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_connected(2 + gen.below(10), 0.3, gen);
    const auto anchor = static_cast<NodeId>(gen.below(g.num_nodes()));
    const auto base = instance_on(g, anchor, 8);

    std::vector<NodeId> perm(g.num_nodes());
    std::iota(perm.begin(), perm.end(), NodeId{0});
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[gen.below(i)]);
    std::vector<Edge> edges;
    for (auto [u, v] : g.edge_list()) edges.emplace_back(perm[u], perm[v]);
    SubgraphInstance moved;
    moved.subgraph = make_graph(g.num_nodes(), edges);
    moved.anchor = perm[anchor];
    moved.features = Matrix(g.num_nodes(), 8);
    for (NodeId v = 0; v < g.num_nodes(); ++v)
      for (std::size_t c = 0; c < 8; ++c) moved.features(perm[v], c) = base.features(v, c);

    const auto a = embed_instance(p, base);
    const auto b = embed_instance(p, moved);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) < 1e-12);
  }
}

TEST_CASE("backward matches central differences") {
  Rng gen(5);
  auto p = init_params(small_config(), 11);
  // Non-zero biases so every segment has a visible gradient.
  for (auto& x : p.flat()) x += 0.05 * (gen.uniform() - 0.5);
  const auto inst = random_instances(4, 8, gen);
  const auto batch = refs(inst);
  Matrix up(4, 5);
  for (std::size_t i = 0; i < up.size(); ++i) up.data()[i] = gen.uniform() * 2 - 1;

  const auto grad = backward(p, batch, up);
  REQUIRE(grad.size() == p.size());
  auto objective = [&](const std::vector<double>& theta) {
    ModelParams q = p;
    std::copy(theta.begin(), theta.end(), q.flat().begin());
    const auto e = forward(q, batch);
    double s = 0;
    for (std::size_t i = 0; i < e.size(); ++i) s += e.data()[i] * up.data()[i];
    return s;
  };
  const std::vector<double> theta(p.flat().begin(), p.flat().end());
  std::size_t checked = 0, bad = 0;
  for (std::size_t j = 0; j < theta.size(); j += 3) {
    const double fd = central_diff(objective, theta, j, 1e-6);
    ++checked;
    // Differences below 1e-8 are at the rounding level of the stencil.
    if (std::abs(fd - grad[j]) > 1e-8 + 1e-5 * std::abs(grad[j])) ++bad;
  }
  CHECK(checked > 40);
  // Allow a rare ReLU kink inside the stencil.
  CHECK(bad <= 1);
}

TEST_CASE("forward and backward are thread-count invariant") {
  Rng gen(6);
  const auto p = init_params(small_config(), 1);
  const auto inst = random_instances(17, 8, gen);
  const auto batch = refs(inst);
  Matrix up(17, 5, 0.3);
  CHECK(forward(p, batch, 1) == forward(p, batch, 4));
  CHECK(backward(p, batch, up, 1) == backward(p, batch, up, 3));
}

TEST_CASE("shape errors") {
  const auto p = init_params(small_config(), 1);
  const auto wrong = instance_on(cycle_graph(4), 0, 9);
  CHECK(errc_of([&] { embed_instance(p, wrong); }) == code(Errc::invalid_argument));
  const auto ok = instance_on(cycle_graph(4), 0, 8);
  CHECK(errc_of([&] { backward(p, InstanceRefs{&ok}, Matrix(2, 5)); }) == code(Errc::invalid_argument));
  EncoderConfig bad = small_config();
  bad.layers = 0;
  CHECK(errc_of([&] { bad.validate(); }) == code(Errc::invalid_argument));
}

TEST_CASE("checkpoints round-trip exactly") {
  TempDir dir("ckpt");
  auto p = init_params(small_config(), 21);
  p.flat()[0] = 1.0 / 3.0;
  p.flat()[1] = -2.5e-300;
  CheckpointMeta meta;
  meta.iteration = 42;
  meta.extra["graph"] = "pl_n100";
  meta.extra["seed"] = "7";
  save_checkpoint(dir / "a.ckpt", p, meta);
  const auto c = load_checkpoint(dir / "a.ckpt");
  CHECK(c.params == p);
  CHECK(c.params.config() == p.config());
  CHECK(c.meta.iteration == 42);
  CHECK(c.meta.extra == meta.extra);
  CHECK(checkpoint_text(c.params, c.meta) == read_file(dir / "a.ckpt"));
}

TEST_CASE("checkpoint errors") {
  const auto p = init_params(small_config(), 21);
  const auto text = checkpoint_text(p, {});
  auto replace = [&](const std::string& from, const std::string& to) {
    auto t = text;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  CHECK(errc_of([&] { parse_checkpoint(replace("format_version 1", "format_version 2")); }) ==
        code(Errc::version));
  CHECK(errc_of([&] { parse_checkpoint(text.substr(0, text.size() / 2)); }) == code(Errc::format));
  CHECK(errc_of([&] { parse_checkpoint(replace("d_feat 8", "d_feat 9")); }) == code(Errc::format));
  CHECK(errc_of([&] { parse_checkpoint(replace("params\n", "params\nabc\n")); }) == code(Errc::format));
  CHECK(errc_of([&] { parse_checkpoint(replace("format_version 1\n", "")); }) == code(Errc::format));
  CHECK(errc_of([&] { parse_checkpoint(replace("iteration", "bogus")); }) == code(Errc::format));
  CHECK(errc_of([] { load_checkpoint("/nonexistent/x.ckpt"); }) == code(Errc::io));
}
