#pragma once

// Simple graphs on up to 64 vertices, small pattern graphs, homomorphism
// counting and cut distance to constant graphons.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "afkg/lattice.hpp"

namespace afkg::ergm {

/// An undirected simple graph on vertices 0..n-1 stored as adjacency bitsets.
/// Potential edges {u < v} are indexed lexicographically; that index is the
/// coordinate of the corresponding SpinConfig.
class GraphConfig {
 public:
  GraphConfig() = default;
  explicit GraphConfig(std::size_t n);

  static GraphConfig from_spins(const SpinConfig& x, std::size_t n);
  static GraphConfig complete(std::size_t n);
  static GraphConfig from_edge_list(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  [[nodiscard]] std::size_t vertex_count() const noexcept { return n_; }
  [[nodiscard]] std::size_t pair_count() const noexcept { return n_ * (n_ - 1) / 2; }
  [[nodiscard]] bool has_edge(std::size_t u, std::size_t v) const noexcept { return (adj_[u] >> v) & 1ULL; }
  void set_edge(std::size_t u, std::size_t v, bool present);
  void flip_edge(std::size_t u, std::size_t v) { set_edge(u, v, !has_edge(u, v)); }
  [[nodiscard]] std::uint64_t neighbors(std::size_t u) const noexcept { return adj_[u]; }
  [[nodiscard]] std::size_t degree(std::size_t u) const noexcept;
  [[nodiscard]] std::size_t edge_count() const noexcept { return edges_; }
  [[nodiscard]] double edge_density() const noexcept;

  [[nodiscard]] SpinConfig to_spins() const;
  [[nodiscard]] GraphConfig complement() const;
  [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> edge_list() const;

  friend bool operator==(const GraphConfig& a, const GraphConfig& b) noexcept {
    return a.n_ == b.n_ && a.adj_ == b.adj_;
  }

 private:
  std::size_t n_ = 0;
  std::size_t edges_ = 0;
  std::vector<std::uint64_t> adj_;
};

std::size_t edge_index(std::size_t n, std::size_t u, std::size_t v);
std::pair<std::size_t, std::size_t> edge_endpoints(std::size_t n, std::size_t index);

/// Edge-list text: one "u v" per line, 0-indexed, u < v, sorted.
void write_edge_list(std::ostream& out, const GraphConfig& g);
GraphConfig read_edge_list(std::istream& in, std::size_t n);

/// A small pattern graph G.
struct SmallGraph {
  std::size_t vertices = 0;
  std::vector<std::pair<int, int>> edges;
  std::string name;

  [[nodiscard]] std::size_t edge_count() const noexcept { return edges.size(); }
};

SmallGraph single_edge();
SmallGraph triangle();
SmallGraph path(std::size_t edges);
SmallGraph cycle(std::size_t length);
SmallGraph star(std::size_t leaves);
/// Rejects loops, repeated edges and out-of-range endpoints.
SmallGraph make_small_graph(std::size_t vertices, std::vector<std::pair<int, int>> edges, std::string name);

bool is_connected(const SmallGraph& g);
bool has_isolated_vertex(const SmallGraph& g);
/// Canonical adjacency mask (minimum over vertex permutations).
std::uint64_t canonical_form(const SmallGraph& g);

/// Number of maps V(G) -> V(x) sending edges to edges. |V(G)| <= 6.
std::uint64_t count_homomorphisms(const SmallGraph& g, const GraphConfig& x);
/// N_G(x with {u,v} present) - N_G(x with {u,v} absent), counted directly as the
/// homomorphisms that use {u,v}.
std::uint64_t count_rooted(const SmallGraph& g, const GraphConfig& x, std::size_t u, std::size_t v);

/// t(G,x) = N_G(x) / n^{|V(G)|}.
double hom_density(const SmallGraph& g, const GraphConfig& x);

/// r_G(x,e) = (d_e N_G(x) / (2|E| n^{|V|-2}))^{1/(|E|-1)}. Requires |E(G)| >= 2.
double r_statistic(const SmallGraph& g, const GraphConfig& x, std::size_t u, std::size_t v);

/// Connected graphs with 3..v_max vertices and at least two edges, one per
/// isomorphism class. v_max <= 5.
std::vector<SmallGraph> probe_catalog(std::size_t v_max);

/// Result of a cut-norm evaluation against the constant graphon W_p.
struct CutNormValue {
  double value = 0.0;
  /// True when `value` is exact; otherwise `value` is a certified lower bound
  /// and `upper_bound` the trivial max(p, 1-p).
  bool exact = true;
  double upper_bound = 0.0;
};

/// d_cut(W_x, W_p) = (1/n^2) max_{S,T} |e(S,T) - p|S||T||, e counting ordered
/// adjacent pairs. Exact for n <= exact_max_n, else greedy lower bound.
CutNormValue cut_norm_to_constant(const GraphConfig& x, double p, std::size_t exact_max_n = 12);

/// Exact cut norm maintained under single-edge flips via per-subset degree tables.
class CutNormTracker {
 public:
  CutNormTracker(const GraphConfig& x, double p);

  [[nodiscard]] double value() const;
  /// Applies the flip of {u,v} to the tables (the caller keeps the graph).
  void flip(std::size_t u, std::size_t v, bool now_present);
  [[nodiscard]] std::size_t vertex_count() const noexcept { return n_; }

 private:
  std::size_t n_;
  double p_;
  std::vector<std::uint8_t> deg_;  // deg_[S * n + v] = |N(v) ∩ S|
};

}  // namespace afkg::ergm
