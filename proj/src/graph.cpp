#include "afkg/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "afkg/rng.hpp"

namespace afkg::ergm {

namespace {

constexpr std::size_t kMaxVertices = 64;
constexpr std::size_t kMaxPatternVertices = 6;

std::uint64_t low_mask(std::size_t n) { return n >= 64 ? ~0ULL : ((1ULL << n) - 1ULL); }

struct Slot {
  int vertex;
  // (earlier position, edge index) pairs constraining this slot.
  std::vector<std::pair<int, int>> back;
};

// Vertex order where each vertex follows at least one neighbour when possible.
std::vector<Slot> plan(const SmallGraph& g, std::vector<int> seed_order) {
  const auto nv = static_cast<int>(g.vertices);
  std::vector<int> order = std::move(seed_order);
  std::vector<bool> placed(g.vertices, false);
  for (int v : order) placed[static_cast<std::size_t>(v)] = true;
  while (static_cast<int>(order.size()) < nv) {
    int pick = -1;
    for (int v = 0; v < nv && pick < 0; ++v) {
      if (placed[static_cast<std::size_t>(v)]) continue;
      for (const auto& [a, b] : g.edges) {
        if ((a == v && placed[static_cast<std::size_t>(b)]) || (b == v && placed[static_cast<std::size_t>(a)])) {
          pick = v;
          break;
        }
      }
    }
    if (pick < 0)
      for (int v = 0; v < nv; ++v)
        if (!placed[static_cast<std::size_t>(v)]) {
          pick = v;
          break;
        }
    placed[static_cast<std::size_t>(pick)] = true;
    order.push_back(pick);
  }
  std::vector<int> pos(g.vertices);
  for (int t = 0; t < nv; ++t) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = t;
  std::vector<Slot> slots;
  for (int t = 0; t < nv; ++t) {
    Slot s{order[static_cast<std::size_t>(t)], {}};
    for (int k = 0; k < static_cast<int>(g.edges.size()); ++k) {
      const auto [a, b] = g.edges[static_cast<std::size_t>(k)];
      const int other = a == s.vertex ? b : (b == s.vertex ? a : -1);
      if (other >= 0 && pos[static_cast<std::size_t>(other)] < t) s.back.emplace_back(pos[static_cast<std::size_t>(other)], k);
    }
    slots.push_back(std::move(s));
  }
  return slots;
}

// Counts completions of images[0..start) over the remaining slots. Edge k uses
// `minus` when k < split and `plus` otherwise.
std::uint64_t extend(const std::vector<Slot>& slots, std::size_t t, std::vector<std::size_t>& image,
                     const std::vector<std::uint64_t>& minus, const std::vector<std::uint64_t>& plus, int split,
                     std::uint64_t all) {
  std::uint64_t cand = all;
  for (const auto& [p, k] : slots[t].back) {
    const auto& adj = k < split ? minus : plus;
    cand &= adj[image[static_cast<std::size_t>(p)]];
    if (cand == 0) return 0;
  }
  if (t + 1 == slots.size()) return static_cast<std::uint64_t>(std::popcount(cand));
  std::uint64_t total = 0;
  while (cand != 0) {
    const auto w = static_cast<std::size_t>(std::countr_zero(cand));
    cand &= cand - 1;
    image[t] = w;
    total += extend(slots, t + 1, image, minus, plus, split, all);
  }
  return total;
}

std::vector<std::uint64_t> adjacency(const GraphConfig& x) {
  std::vector<std::uint64_t> adj(x.vertex_count());
  for (std::size_t u = 0; u < x.vertex_count(); ++u) adj[u] = x.neighbors(u);
  return adj;
}

void check_pattern(const SmallGraph& g) {
  if (g.vertices == 0) throw Rejected("pattern graph has no vertices");
  if (g.vertices > kMaxPatternVertices)
    throw Rejected("homomorphism counting supports |V(G)| <= 6; larger patterns need density sampling");
}

// Cut objective for a fixed S from per-vertex degrees into S.
template <class DegreeOf>
double best_for_subset(std::size_t n, double p, std::size_t s_size, DegreeOf&& deg) {
  double pos = 0.0, neg = 0.0;
  const double ps = p * static_cast<double>(s_size);
  for (std::size_t v = 0; v < n; ++v) {
    const double c = static_cast<double>(deg(v)) - ps;
    if (c > 0) pos += c;
    else neg -= c;
  }
  return std::max(pos, neg);
}

}  // namespace

GraphConfig::GraphConfig(std::size_t n) : n_(n), adj_(n, 0) {
  if (n < 2 || n > kMaxVertices) throw Rejected("graph vertex count must lie in [2, 64]");
}

GraphConfig GraphConfig::from_spins(const SpinConfig& x, std::size_t n) {
  GraphConfig g(n);
  if (x.dimension() != g.pair_count() || !x.binary()) throw Rejected("spin configuration does not encode a graph on n vertices");
  std::size_t idx = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v, ++idx)
      if (x[idx]) g.set_edge(u, v, true);
  return g;
}

GraphConfig GraphConfig::complete(std::size_t n) {
  GraphConfig g(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) g.set_edge(u, v, true);
  return g;
}

GraphConfig GraphConfig::from_edge_list(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  GraphConfig g(n);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n || u == v) throw Rejected("edge list entry out of range or a loop");
    g.set_edge(u, v, true);
  }
  return g;
}

void GraphConfig::set_edge(std::size_t u, std::size_t v, bool present) {
  if (u >= n_ || v >= n_ || u == v) throw Rejected("invalid edge");
  if (has_edge(u, v) == present) return;
  adj_[u] ^= 1ULL << v;
  adj_[v] ^= 1ULL << u;
  edges_ = present ? edges_ + 1 : edges_ - 1;
}

std::size_t GraphConfig::degree(std::size_t u) const noexcept { return static_cast<std::size_t>(std::popcount(adj_[u])); }

double GraphConfig::edge_density() const noexcept {
  return static_cast<double>(edges_) / static_cast<double>(pair_count());
}

SpinConfig GraphConfig::to_spins() const {
  SpinConfig x(pair_count());
  std::size_t idx = 0;
  for (std::size_t u = 0; u < n_; ++u)
    for (std::size_t v = u + 1; v < n_; ++v, ++idx)
      if (has_edge(u, v)) x.set(idx, 1);
  return x;
}

GraphConfig GraphConfig::complement() const {
  GraphConfig g(n_);
  for (std::size_t u = 0; u < n_; ++u)
    for (std::size_t v = u + 1; v < n_; ++v)
      if (!has_edge(u, v)) g.set_edge(u, v, true);
  return g;
}

std::vector<std::pair<std::size_t, std::size_t>> GraphConfig::edge_list() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t u = 0; u < n_; ++u)
    for (std::size_t v = u + 1; v < n_; ++v)
      if (has_edge(u, v)) out.emplace_back(u, v);
  return out;
}

std::size_t edge_index(std::size_t n, std::size_t u, std::size_t v) {
  if (u > v) std::swap(u, v);
  if (u == v || v >= n) throw Rejected("invalid edge");
  return u * (2 * n - u - 1) / 2 + (v - u - 1);
}

std::pair<std::size_t, std::size_t> edge_endpoints(std::size_t n, std::size_t index) {
  std::size_t u = 0;
  while (u + 1 < n && index >= n - u - 1) {
    index -= n - u - 1;
    ++u;
  }
  if (u + 1 >= n) throw Rejected("edge index out of range");
  return {u, u + 1 + index};
}

void write_edge_list(std::ostream& out, const GraphConfig& g) {
  for (const auto& [u, v] : g.edge_list()) out << u << ' ' << v << '\n';
}

GraphConfig read_edge_list(std::istream& in, std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    long long u = -1, v = -1;
    std::string rest;
    if (!(ls >> u >> v) || (ls >> rest) || u < 0 || v <= u)
      throw Rejected("edge list line " + std::to_string(lineno) + ": expected \"u v\" with 0 <= u < v");
    edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
  }
  return GraphConfig::from_edge_list(n, edges);
}

SmallGraph make_small_graph(std::size_t vertices, std::vector<std::pair<int, int>> edges, std::string name) {
  std::vector<std::pair<int, int>> seen;
  for (auto& [a, b] : edges) {
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= vertices || static_cast<std::size_t>(b) >= vertices)
      throw Rejected("pattern edge endpoint out of range");
    if (a == b) throw Rejected("pattern graph has a loop");
    const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) throw Rejected("pattern graph has a repeated edge");
    seen.emplace_back(key);
  }
  return SmallGraph{vertices, std::move(edges), std::move(name)};
}

SmallGraph single_edge() { return make_small_graph(2, {{0, 1}}, "edge"); }
SmallGraph triangle() { return make_small_graph(3, {{0, 1}, {1, 2}, {0, 2}}, "triangle"); }

SmallGraph path(std::size_t edges) {
  std::vector<std::pair<int, int>> e;
  for (std::size_t k = 0; k < edges; ++k) e.emplace_back(static_cast<int>(k), static_cast<int>(k + 1));
  return make_small_graph(edges + 1, std::move(e), "path" + std::to_string(edges));
}

SmallGraph cycle(std::size_t length) {
  if (length < 3) throw Rejected("cycle length must be at least 3");
  std::vector<std::pair<int, int>> e;
  for (std::size_t k = 0; k < length; ++k) e.emplace_back(static_cast<int>(k), static_cast<int>((k + 1) % length));
  return make_small_graph(length, std::move(e), "cycle" + std::to_string(length));
}

SmallGraph star(std::size_t leaves) {
  std::vector<std::pair<int, int>> e;
  for (std::size_t k = 1; k <= leaves; ++k) e.emplace_back(0, static_cast<int>(k));
  return make_small_graph(leaves + 1, std::move(e), "star" + std::to_string(leaves));
}

bool is_connected(const SmallGraph& g) {
  if (g.vertices == 0) return false;
  std::vector<int> parent(g.vertices);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
    return v;
  };
  for (const auto& [a, b] : g.edges) parent[static_cast<std::size_t>(find(a))] = find(b);
  const int root = find(0);
  for (std::size_t v = 1; v < g.vertices; ++v)
    if (find(static_cast<int>(v)) != root) return false;
  return true;
}

bool has_isolated_vertex(const SmallGraph& g) {
  std::vector<bool> touched(g.vertices, false);
  for (const auto& [a, b] : g.edges) touched[static_cast<std::size_t>(a)] = touched[static_cast<std::size_t>(b)] = true;
  return std::find(touched.begin(), touched.end(), false) != touched.end();
}

std::uint64_t canonical_form(const SmallGraph& g) {
  check_pattern(g);
  std::vector<int> perm(g.vertices);
  std::iota(perm.begin(), perm.end(), 0);
  const auto nv = g.vertices;
  std::uint64_t best = ~0ULL;
  do {
    std::uint64_t mask = 0;
    for (const auto& [a, b] : g.edges) {
      auto [i, j] = std::minmax(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
      mask |= 1ULL << (static_cast<std::size_t>(i) * nv + static_cast<std::size_t>(j));
    }
    best = std::min(best, mask);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::uint64_t count_homomorphisms(const SmallGraph& g, const GraphConfig& x) {
  check_pattern(g);
  const auto slots = plan(g, {0});
  const auto adj = adjacency(x);
  std::vector<std::size_t> image(g.vertices);
  const std::uint64_t all = low_mask(x.vertex_count());
  if (slots.size() == 1) return x.vertex_count();
  std::uint64_t total = 0;
  for (std::size_t w = 0; w < x.vertex_count(); ++w) {
    image[0] = w;
    total += extend(slots, 1, image, adj, adj, 0, all);
  }
  return total;
}

std::uint64_t count_rooted(const SmallGraph& g, const GraphConfig& x, std::size_t u, std::size_t v) {
  check_pattern(g);
  if (u == v || u >= x.vertex_count() || v >= x.vertex_count()) throw Rejected("invalid root edge");
  auto plus = adjacency(x);
  auto minus = plus;
  plus[u] |= 1ULL << v;
  plus[v] |= 1ULL << u;
  minus[u] &= ~(1ULL << v);
  minus[v] &= ~(1ULL << u);
  const std::uint64_t all = low_mask(x.vertex_count());
  std::vector<std::size_t> image(g.vertices);
  std::uint64_t total = 0;
  // Classify by the first pattern edge mapped onto {u,v}.
  for (int k = 0; k < static_cast<int>(g.edges.size()); ++k) {
    const auto [a, b] = g.edges[static_cast<std::size_t>(k)];
    const auto slots = plan(g, {a, b});
    for (int orient = 0; orient < 2; ++orient) {
      image[0] = orient == 0 ? u : v;
      image[1] = orient == 0 ? v : u;
      total += slots.size() == 2 ? 1 : extend(slots, 2, image, minus, plus, k, all);
    }
  }
  return total;
}

double hom_density(const SmallGraph& g, const GraphConfig& x) {
  return static_cast<double>(count_homomorphisms(g, x)) /
         std::pow(static_cast<double>(x.vertex_count()), static_cast<double>(g.vertices));
}

double r_statistic(const SmallGraph& g, const GraphConfig& x, std::size_t u, std::size_t v) {
  if (g.edge_count() < 2) throw Rejected("r statistic needs |E(G)| >= 2 (the exponent 1/(|E|-1) is undefined)");
  const double d = static_cast<double>(count_rooted(g, x, u, v));
  const double norm = 2.0 * static_cast<double>(g.edge_count()) *
                      std::pow(static_cast<double>(x.vertex_count()), static_cast<double>(g.vertices) - 2.0);
  return std::pow(d / norm, 1.0 / (static_cast<double>(g.edge_count()) - 1.0));
}

std::vector<SmallGraph> probe_catalog(std::size_t v_max) {
  if (v_max > 5) throw Rejected("probe catalog is available for v_max <= 5");
  std::vector<SmallGraph> out;
  std::vector<std::uint64_t> seen;
  for (std::size_t nv = 3; nv <= v_max; ++nv) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < static_cast<int>(nv); ++a)
      for (int b = a + 1; b < static_cast<int>(nv); ++b) pairs.emplace_back(a, b);
    for (std::uint64_t mask = 0; mask < (1ULL << pairs.size()); ++mask) {
      if (std::popcount(mask) < 2) continue;
      std::vector<std::pair<int, int>> e;
      std::string name = "v" + std::to_string(nv) + ":";
      for (std::size_t k = 0; k < pairs.size(); ++k)
        if ((mask >> k) & 1ULL) {
          e.push_back(pairs[k]);
          name += std::to_string(pairs[k].first) + std::to_string(pairs[k].second) + ",";
        }
      name.pop_back();
      SmallGraph g{nv, std::move(e), std::move(name)};
      if (!is_connected(g) || has_isolated_vertex(g)) continue;
      const std::uint64_t c = canonical_form(g) | (static_cast<std::uint64_t>(nv) << 40);
      if (std::find(seen.begin(), seen.end(), c) != seen.end()) continue;
      seen.push_back(c);
      out.push_back(std::move(g));
    }
  }
  return out;
}

CutNormValue cut_norm_to_constant(const GraphConfig& x, double p, std::size_t exact_max_n) {
  if (!(p >= 0.0 && p <= 1.0)) throw Rejected("constant graphon value must lie in [0,1]");
  const std::size_t n = x.vertex_count();
  const double n2 = static_cast<double>(n * n);
  if (n <= exact_max_n && n <= 24) {
    double best = 0.0;
    for (std::uint64_t s = 1; s < (1ULL << n); ++s) {
      const auto size = static_cast<std::size_t>(std::popcount(s));
      best = std::max(best, best_for_subset(n, p, size, [&](std::size_t v) { return std::popcount(x.neighbors(v) & s); }));
    }
    return CutNormValue{best / n2, true, best / n2};
  }
  // Alternating maximization from deterministic restarts.
  Rng rng(0x5eedc07ULL ^ n);
  double best = 0.0;
  auto improve = [&](std::uint64_t s) {
    double last = -1.0;
    for (int it = 0; it < 64; ++it) {
      const auto size = static_cast<std::size_t>(std::popcount(s));
      const double ps = p * static_cast<double>(size);
      std::uint64_t tpos = 0, tneg = 0;
      double pos = 0.0, neg = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        const double c = static_cast<double>(std::popcount(x.neighbors(v) & s)) - ps;
        if (c > 0) {
          pos += c;
          tpos |= 1ULL << v;
        } else if (c < 0) {
          neg -= c;
          tneg |= 1ULL << v;
        }
      }
      const double val = std::max(pos, neg);
      best = std::max(best, val);
      if (val <= last) break;
      last = val;
      s = pos >= neg ? tpos : tneg;
      if (s == 0) break;
    }
  };
  const std::uint64_t all = low_mask(n);
  improve(all);
  for (std::size_t v = 0; v < n; ++v) improve(1ULL << v);
  for (int r = 0; r < 64; ++r) {
    const std::uint64_t s = rng() & all;
    if (s != 0) improve(s);
  }
  return CutNormValue{best / n2, false, std::max(p, 1.0 - p)};
}

CutNormTracker::CutNormTracker(const GraphConfig& x, double p) : n_(x.vertex_count()), p_(p) {
  if (n_ > 16) throw Rejected("incremental cut norm supports n <= 16");
  const std::size_t subsets = std::size_t{1} << n_;
  deg_.assign(subsets * n_, 0);
  for (std::size_t s = 0; s < subsets; ++s)
    for (std::size_t v = 0; v < n_; ++v)
      deg_[s * n_ + v] = static_cast<std::uint8_t>(std::popcount(x.neighbors(v) & s));
}

double CutNormTracker::value() const {
  const std::size_t subsets = std::size_t{1} << n_;
  double best = 0.0;
  for (std::size_t s = 1; s < subsets; ++s) {
    const std::uint8_t* row = &deg_[s * n_];
    best = std::max(best, best_for_subset(n_, p_, static_cast<std::size_t>(std::popcount(s)),
                                          [row](std::size_t v) { return row[v]; }));
  }
  return best / static_cast<double>(n_ * n_);
}

void CutNormTracker::flip(std::size_t u, std::size_t v, bool now_present) {
  const std::size_t subsets = std::size_t{1} << n_;
  const int delta = now_present ? 1 : -1;
  for (std::size_t s = 0; s < subsets; ++s) {
    if ((s >> u) & 1U) deg_[s * n_ + v] = static_cast<std::uint8_t>(deg_[s * n_ + v] + delta);
    if ((s >> v) & 1U) deg_[s * n_ + u] = static_cast<std::uint8_t>(deg_[s * n_ + u] + delta);
  }
}

}  // namespace afkg::ergm
