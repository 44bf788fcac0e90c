#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "afkg/graph.hpp"
#include "afkg/rng.hpp"

using namespace afkg;
using namespace afkg::ergm;

namespace {

GraphConfig oracle_graph() {
  return GraphConfig::from_edge_list(6, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {3, 5}, {1, 4}});
}

GraphConfig random_graph(std::size_t n, double p, Rng& r) {
  GraphConfig g(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) g.set_edge(u, v, r.uniform() < p);
  return g;
}

}  // namespace

TEST_CASE("edge indexing round-trips") {
  for (std::size_t n : {2, 5, 9}) {
    std::size_t idx = 0;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v) {
        CHECK(edge_index(n, u, v) == idx);
        CHECK(edge_index(n, v, u) == idx);
        CHECK(edge_endpoints(n, idx) == std::pair{u, v});
        ++idx;
      }
  }
}

TEST_CASE("graph config basics") {
  auto g = oracle_graph();
  CHECK(g.edge_count() == 8);
  CHECK(g.degree(1) == 3);
  CHECK(g.edge_density() == doctest::Approx(8.0 / 15.0));
  CHECK(GraphConfig::from_spins(g.to_spins(), 6) == g);
  CHECK(g.complement().edge_count() == 7);
  g.flip_edge(0, 5);
  CHECK(g.has_edge(5, 0));
  CHECK(g.edge_count() == 9);
  std::stringstream ss;
  write_edge_list(ss, g);
  CHECK(read_edge_list(ss, 6) == g);
  CHECK(GraphConfig::complete(5).edge_count() == 10);
}

TEST_CASE("edge list reader rejects malformed input") {
  std::stringstream bad("0 7\n");
  CHECK_THROWS_AS(read_edge_list(bad, 6), Rejected);
  std::stringstream loop("2 2\n");
  CHECK_THROWS_AS(read_edge_list(loop, 6), Rejected);
}

TEST_CASE("homomorphism counts match the oracle") {
  const auto g = oracle_graph();
  CHECK(count_homomorphisms(single_edge(), g) == 16);
  CHECK(count_homomorphisms(triangle(), g) == 12);
  CHECK(count_homomorphisms(path(2), g) == 44);
  CHECK(count_homomorphisms(cycle(4), g) == 80);
  CHECK(count_homomorphisms(star(3), g) == 124);
  CHECK(hom_density(triangle(), g) == doctest::Approx(12.0 / 216.0));
}

TEST_CASE("rooted counts equal the flip difference") {
  Rng r(10);
  for (const auto& pat : {single_edge(), triangle(), path(2), path(3), cycle(4), star(3)}) {
    for (int t = 0; t < 10; ++t) {
      auto g = random_graph(7, 0.5, r);
      const auto u = r.below(7);
      auto v = r.below(7);
      if (u == v) v = (u + 1) % 7;
      auto with = g, without = g;
      with.set_edge(u, v, true);
      without.set_edge(u, v, false);
      CHECK(count_rooted(pat, g, u, v) == count_homomorphisms(pat, with) - count_homomorphisms(pat, without));
    }
  }
}

TEST_CASE("r statistic on the complete graph") {
  // K_n: d_e N_triangle = 6(n-2), 2|E| n^{|V|-2} = 6n.
  const auto k = GraphConfig::complete(8);
  CHECK(r_statistic(triangle(), k, 0, 1) == doctest::Approx(std::sqrt(6.0 / 8.0)));
  CHECK_THROWS_AS(r_statistic(single_edge(), k, 0, 1), Rejected);
}

TEST_CASE("small graph validation and canonical forms") {
  CHECK_THROWS_AS(make_small_graph(3, {{0, 0}}, "loop"), Rejected);
  CHECK_THROWS_AS(make_small_graph(3, {{0, 1}, {1, 0}}, "dup"), Rejected);
  CHECK_THROWS_AS(make_small_graph(3, {{0, 3}}, "range"), Rejected);
  const auto p1 = make_small_graph(3, {{0, 1}, {1, 2}}, "a");
  const auto p2 = make_small_graph(3, {{0, 2}, {2, 1}}, "b");
  CHECK(canonical_form(p1) == canonical_form(p2));
  CHECK(canonical_form(p1) != canonical_form(triangle()));
  CHECK(is_connected(p1));
  CHECK_FALSE(is_connected(make_small_graph(4, {{0, 1}, {2, 3}}, "two")));
  CHECK(has_isolated_vertex(make_small_graph(3, {{0, 1}}, "iso")));
}

TEST_CASE("probe catalog has one graph per isomorphism class") {
  // Connected graphs with >= 2 edges: 2 on 3 vertices, 6 on 4, 21 on 5.
  CHECK(probe_catalog(3).size() == 2);
  CHECK(probe_catalog(4).size() == 8);
  const auto cat = probe_catalog(5);
  CHECK(cat.size() == 29);
  std::set<std::uint64_t> forms;
  for (const auto& g : cat) {
    CHECK(is_connected(g));
    CHECK(g.edge_count() >= 2);
    forms.insert(canonical_form(g));
  }
  CHECK(forms.size() == cat.size());
}

TEST_CASE("cut norm matches the brute-force oracle") {
  const auto g = oracle_graph();
  CHECK(cut_norm_to_constant(g, 0.3).value == doctest::Approx(0.14444444444444454).epsilon(1e-12));
  CHECK(cut_norm_to_constant(g, 0.5).value == doctest::Approx(0.1111111111111111).epsilon(1e-12));
  CHECK(cut_norm_to_constant(g, 0.3).exact);
}

TEST_CASE("cut norm lower bound for large graphs is below the exact value") {
  Rng r(2);
  const auto g = random_graph(10, 0.4, r);
  const auto exact = cut_norm_to_constant(g, 0.4, 12);
  const auto greedy = cut_norm_to_constant(g, 0.4, 4);
  CHECK_FALSE(greedy.exact);
  CHECK(greedy.value <= exact.value + 1e-12);
  CHECK(greedy.upper_bound == doctest::Approx(0.6));
}

TEST_CASE("incremental cut norm tracks single flips") {
  Rng r(12);
  auto g = random_graph(9, 0.5, r);
  CutNormTracker tr(g, 0.5);
  for (int t = 0; t < 200; ++t) {
    const auto u = r.below(9);
    auto v = r.below(9);
    if (u == v) continue;
    g.flip_edge(u, v);
    tr.flip(u, v, g.has_edge(u, v));
    REQUIRE(tr.value() == doctest::Approx(cut_norm_to_constant(g, 0.5).value).epsilon(1e-12));
  }
}
