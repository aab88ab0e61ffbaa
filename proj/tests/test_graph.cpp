#include <doctest.h>

#include <algorithm>
#include <set>

#include "apt/graph.hpp"
#include "support.hpp"

using namespace apt;
using namespace testing;

TEST_CASE("triangle edge list loads with all degrees 2") {
  TempDir dir("graph");
  write_file(dir / "tri.txt", "0 1\n1 2\n2 0\n");
  const auto r = load_edge_list(dir / "tri.txt");
  CHECK(r.graph.num_nodes() == 3);
  CHECK(r.graph.num_edges() == 3);
  for (NodeId v = 0; v < 3; ++v) CHECK(r.graph.degree(v) == 2);
  CHECK(r.removed_lines() == 0);
  CHECK(r.graph.name() == "tri");
}

TEST_CASE("duplicates and self-loops are dropped and counted") {
  TempDir dir("graph");
  write_file(dir / "d.txt", "0 1\n0 1\n1 1\n");
  const auto r = load_edge_list(dir / "d.txt");
  CHECK(r.graph.num_nodes() == 2);
  CHECK(r.graph.num_edges() == 1);
  CHECK(r.removed_lines() == 2);
  CHECK(r.self_loops == 1);
  CHECK(r.duplicates == 1);
}

TEST_CASE("reversed directed edges collapse into one undirected edge") {
  TempDir dir("graph");
  write_file(dir / "d.txt", "# directed\n\n3 7\n7 3\n   \n7 9\n");
  const auto r = load_edge_list(dir / "d.txt");
  CHECK(r.graph.num_nodes() == 3);
  CHECK(r.graph.num_edges() == 2);
  CHECK(r.edge_lines == 3);
  CHECK(r.duplicates == 1);
  CHECK(r.graph.original_id(0) == 3);
  CHECK(r.graph.original_id(1) == 7);
  CHECK(r.graph.original_id(2) == 9);
}

TEST_CASE("ids are unsigned 64-bit and compacted in ascending order") {
  TempDir dir("graph");
  write_file(dir / "big.txt", "18446744073709551615 5\n5 1000000000000\n");
  const auto r = load_edge_list(dir / "big.txt");
  REQUIRE(r.graph.num_nodes() == 3);
  CHECK(r.graph.original_id(0) == 5);
  CHECK(r.graph.original_id(1) == 1000000000000ULL);
  CHECK(r.graph.original_id(2) == 18446744073709551615ULL);
  CHECK(r.graph.has_edge(0, 2));
  CHECK(r.graph.has_edge(0, 1));
  CHECK_FALSE(r.graph.has_edge(1, 2));
}

TEST_CASE("loader errors carry distinct codes") {
  TempDir dir("graph");
  CHECK(errc_of([&] { load_edge_list(dir / "missing.txt"); }) == code(Errc::io));
  write_file(dir / "bad.txt", "0 1\n2 x\n");
  CHECK(errc_of([&] { load_edge_list(dir / "bad.txt"); }) == code(Errc::parse));
  write_file(dir / "neg.txt", "0 -1\n");
  CHECK(errc_of([&] { load_edge_list(dir / "neg.txt"); }) == code(Errc::parse));
  write_file(dir / "three.txt", "0 1 2\n");
  CHECK(errc_of([&] { load_edge_list(dir / "three.txt"); }) == code(Errc::parse));
  write_file(dir / "one.txt", "0\n");
  CHECK(errc_of([&] { load_edge_list(dir / "one.txt"); }) == code(Errc::parse));
  write_file(dir / "loops.txt", "1 1\n# nothing else\n");
  CHECK(errc_of([&] { load_edge_list(dir / "loops.txt"); }) == code(Errc::empty_graph));
  write_file(dir / "empty.txt", "");
  CHECK(errc_of([&] { load_edge_list(dir / "empty.txt"); }) == code(Errc::empty_graph));
}

TEST_CASE("write then load round-trips the edge set with original ids") {
  TempDir dir("graph");
  write_file(dir / "a.txt", "10 20\n20 30\n30 10\n30 40\n");
  const auto a = load_edge_list(dir / "a.txt").graph;
  write_edge_list(a, dir / "b.txt");
  const auto b = load_edge_list(dir / "b.txt").graph;
  CHECK(a.edge_list() == b.edge_list());
  for (NodeId v = 0; v < a.num_nodes(); ++v) CHECK(a.original_id(v) == b.original_id(v));
}

TEST_CASE("largest connected component") {
  SUBCASE("components of sizes 5 and 3") {
    const auto g = make_graph(8, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {5, 6}, {6, 7}});
    CHECK(largest_connected_component(g).num_nodes() == 5);
  }
  SUBCASE("connected input is unchanged") {
    const auto g = cycle_graph(7);
    const auto l = largest_connected_component(g);
    CHECK(l.num_nodes() == 7);
    CHECK(l.num_edges() == 7);
    CHECK(l.edge_list() == g.edge_list());
  }
  SUBCASE("path(2) plus a triangle keeps the triangle") {
    const auto g = make_graph(5, {{0, 1}, {2, 3}, {3, 4}, {4, 2}});
    const auto comps = bfs_components(g);
    std::size_t best = 0;
    for (const auto& c : comps) best = std::max(best, c.size());
    const auto l = largest_connected_component(g);
    CHECK(l.num_nodes() == best);
    CHECK(l.num_nodes() == 3);
    CHECK(l.num_edges() == 3);
    CHECK(l.original_id(0) == 2);
  }
  SUBCASE("ties go to the component holding the smallest id") {
    const auto g = make_graph(6, {{3, 4}, {4, 5}, {0, 1}, {1, 2}});
    const auto l = largest_connected_component(g);
    CHECK(l.original_id(0) == 0);
  }
  SUBCASE("edgeless graph gives a single node") {
    const auto g = make_graph(3, {});
    CHECK(largest_connected_component(g).num_nodes() == 1);
  }
}

TEST_CASE("induce_subgraph") {
  SUBCASE("triangle on {0,1}") {
    const auto s = induce_subgraph(complete_graph(3), std::vector<NodeId>{0, 1});
    CHECK(s.num_nodes() == 2);
    CHECK(s.num_edges() == 1);
  }
  SUBCASE("all nodes reproduce the graph") {
    Rng rng(3);
    const auto g = random_graph(30, 0.15, rng);
    std::vector<NodeId> all(g.num_nodes());
    for (NodeId i = 0; i < all.size(); ++i) all[i] = i;
    std::reverse(all.begin(), all.end());
    CHECK(induce_subgraph(g, all).edge_list() == g.edge_list());
  }
  SUBCASE("star leaves only") {
    const auto s = induce_subgraph(star_graph(4), std::vector<NodeId>{1, 2, 3, 4});
    CHECK(s.num_nodes() == 4);
    CHECK(s.num_edges() == 0);
  }
  SUBCASE("relabels by ascending source id") {
    const auto g = path_graph(6);
    const auto s = induce_subgraph(g, std::vector<NodeId>{4, 2, 3});
    CHECK(s.original_id(0) == 2);
    CHECK(s.original_id(1) == 3);
    CHECK(s.original_id(2) == 4);
    CHECK(s.has_edge(0, 1));
    CHECK(s.has_edge(1, 2));
  }
  SUBCASE("out-of-range id") {
    CHECK(errc_of([] { induce_subgraph(path_graph(3), std::vector<NodeId>{0, 3}); }) ==
          code(Errc::invalid_argument));
  }
}

TEST_CASE("random graphs satisfy the structural invariants") {
  Rng gen(20240611);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + gen.below(60);
    const double p = gen.uniform() * 0.3;
    // Random multigraph input with loops and duplicates.
    std::vector<Edge> raw;
    const std::size_t m = gen.below(3 * n + 1);
    for (std::size_t i = 0; i < m; ++i)
      raw.emplace_back(static_cast<NodeId>(gen.below(n)), static_cast<NodeId>(gen.below(n)));
    std::size_t loops = 0, dups = 0;
    const auto g = Graph::from_edges(n, raw, "r", &loops, &dups);
    CAPTURE(trial);

    std::size_t degree_sum = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      const auto nb = g.neighbors(v);
      CHECK(std::is_sorted(nb.begin(), nb.end()));
      CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
      CHECK(std::find(nb.begin(), nb.end(), v) == nb.end());
      CHECK(nb.size() == g.degree(v));
      degree_sum += g.degree(v);
      for (auto u : nb) CHECK(g.has_edge(u, v));
    }
    CHECK(degree_sum == 2 * g.num_edges());
    CHECK(g.num_edges() + loops + dups == m);

    // LCC matches brute-force BFS and is idempotent.
    const auto comps = bfs_components(g);
    std::size_t best = 0;
    for (const auto& c : comps) best = std::max(best, c.size());
    const auto l1 = largest_connected_component(g);
    CHECK(l1.num_nodes() == best);
    const auto l2 = largest_connected_component(l1);
    CHECK(l2.num_nodes() == l1.num_nodes());
    CHECK(l2.edge_list() == l1.edge_list());

    // Induced degrees never exceed the source degrees.
    std::vector<NodeId> subset;
    for (NodeId v = 0; v < n; ++v)
      if (gen.uniform() < 0.5 + p) subset.push_back(v);
    if (subset.empty()) subset.push_back(0);
    const auto s = induce_subgraph(g, subset);
    for (NodeId v = 0; v < s.num_nodes(); ++v) CHECK(s.degree(v) <= g.degree(static_cast<NodeId>(s.original_id(v))));
  }
}

TEST_CASE("connected_components labels agree with BFS") {
  Rng gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_graph(40, 0.04, gen);
    std::size_t count = 0;
    const auto comp = connected_components(g, &count);
    const auto comps = bfs_components(g);
    CHECK(count == comps.size());
    for (const auto& c : comps)
      for (auto v : c) CHECK(comp[v] == comp[c.front()]);
  }
}
