#include "afkg/ergm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "afkg/fkg_lab.hpp"
#include "afkg/gcwm.hpp"

namespace afkg::ergm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-12;

// d_e N_G with closed forms for the two patterns every model uses.
std::uint64_t rooted_fast(const SmallGraph& g, const GraphConfig& x, std::size_t u, std::size_t v) {
  if (g.vertices == 2 && g.edges.size() == 1) return 2;
  if (g.vertices == 3 && g.edges.size() == 3)
    return 6ULL * static_cast<std::uint64_t>(std::popcount(x.neighbors(u) & x.neighbors(v)));
  return count_rooted(g, x, u, v);
}

double npow(std::size_t n, std::size_t k) { return std::pow(static_cast<double>(n), static_cast<double>(k)); }

GraphConfig graph_of_code(std::uint64_t code, std::size_t n) {
  GraphConfig g(n);
  std::size_t idx = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v, ++idx)
      if ((code >> idx) & 1ULL) g.set_edge(u, v, true);
  return g;
}

}  // namespace

std::vector<std::string> validate_spec(const std::vector<SmallGraph>& graphs, const std::vector<double>& beta,
                                       std::size_t n) {
  std::vector<std::string> out;
  if (graphs.empty()) out.emplace_back("at least the edge graph G_0 is required");
  if (graphs.size() != beta.size()) out.emplace_back("one beta per graph is required");
  if (!graphs.empty() && (graphs[0].vertices != 2 || graphs[0].edges.size() != 1))
    out.emplace_back("G_0 must be a single edge");
  for (std::size_t j = 0; j < graphs.size(); ++j) {
    const auto& g = graphs[j];
    if (g.vertices > 6) out.push_back("G_" + std::to_string(j) + " has more than 6 vertices");
    else if (g.edges.empty() || !is_connected(g) || has_isolated_vertex(g))
      out.push_back("G_" + std::to_string(j) + " must be connected with no isolated vertices");
  }
  for (std::size_t j = 0; j < beta.size(); ++j) {
    if (!std::isfinite(beta[j])) out.push_back("beta_" + std::to_string(j) + " is not finite");
    else if (j >= 1 && beta[j] < 0.0) out.push_back("ferromagnetic violation j=" + std::to_string(j));
  }
  if (n < 2 || n > 64) out.emplace_back("n must lie in [2, 64]");
  return out;
}

ErgmSpec make_spec(std::vector<SmallGraph> graphs, std::vector<double> beta, std::size_t n) {
  const auto diags = validate_spec(graphs, beta, n);
  if (!diags.empty()) throw Rejected(diags.front());
  return ErgmSpec{std::move(graphs), std::move(beta), n};
}

ErgmSpec edge_only_spec(double beta0, std::size_t n) { return make_spec({single_edge()}, {beta0}, n); }

ErgmSpec edge_triangle_spec(double beta0, double beta1, std::size_t n) {
  return make_spec({single_edge(), triangle()}, {beta0, beta1}, n);
}

ErgmSpec with_vertices(const ErgmSpec& spec, std::size_t n) { return make_spec(spec.graphs, spec.beta, n); }

double hamiltonian(const ErgmSpec& spec, const GraphConfig& x) {
  double h = 0.0;
  for (std::size_t j = 0; j < spec.graphs.size(); ++j) h += spec.beta[j] * hom_density(spec.graphs[j], x);
  return h;
}

double flip_log_odds(const ErgmSpec& spec, const GraphConfig& x, std::size_t u, std::size_t v) {
  double s = 0.0;
  for (std::size_t j = 0; j < spec.graphs.size(); ++j) {
    if (spec.beta[j] == 0.0) continue;
    const auto& g = spec.graphs[j];
    s += spec.beta[j] * static_cast<double>(rooted_fast(g, x, u, v)) / npow(spec.n, g.vertices - 2);
  }
  return s;
}

std::size_t max_pattern_vertices(const ErgmSpec& spec) {
  std::size_t m = 0;
  for (const auto& g : spec.graphs) m = std::max(m, g.vertices);
  return m;
}

std::vector<double> density_polynomial(const ErgmSpec& spec) {
  std::size_t deg = 0;
  for (const auto& g : spec.graphs) deg = std::max(deg, g.edge_count());
  std::vector<double> c(deg, 0.0);
  for (std::size_t j = 0; j < spec.graphs.size(); ++j) c[spec.graphs[j].edge_count() - 1] += spec.beta[j];
  return c;
}

ErgmRateAnalysis ergm_rate_analysis(const ErgmSpec& spec, double tol, std::size_t grid_size) {
  // 2 L(p) is the Curie-Weiss rate function of the polynomial 2h.
  const auto h = density_polynomial(spec);
  auto h2 = h;
  for (double& c : h2) c *= 2.0;
  const auto base = gcwm::find_maximizers(h2, grid_size, tol);

  ErgmRateAnalysis a;
  a.tolerance = tol;
  double best = kNegInf;
  for (const auto& sp : base.stationary_points) {
    ErgmStationary s{sp.m, 0.5 * sp.rate, 0.5 * sp.rate_d1, 0.5 * sp.rate_d2, sp.fixed_point_residual,
                     sp.map_derivative};
    best = std::max(best, s.rate);
    a.stationary_points.push_back(s);
  }
  const double pairs = static_cast<double>(spec.n * (spec.n - 1) / 2);
  for (const auto& s : a.stationary_points) {
    if (s.rate < best - tol) continue;
    a.maximizers.push_back(s.p);
    if (!(s.rate_d2 < -tol)) {
      a.critical_excluded.push_back(s.p);
      continue;
    }
    a.strict_maximizers.push_back(s.p);
    const double denom = 1.0 - 2.0 * s.p * (1.0 - s.p) * gcwm::poly_d2(h, s.p);
    const bool bad = !(denom > 0.0);
    a.inconsistent.push_back(bad);
    a.sigma_n_squared.push_back(bad ? std::numeric_limits<double>::quiet_NaN()
                                    : s.p * (1.0 - s.p) * pairs / denom);
  }
  return a;
}

double sigma_n_squared(const ErgmSpec& spec, double p_star) {
  if (!(p_star > 0.0 && p_star < 1.0)) throw Rejected("p* must lie in (0,1)");
  const double denom = 1.0 - 2.0 * p_star * (1.0 - p_star) * gcwm::poly_d2(density_polynomial(spec), p_star);
  if (!(denom > 0.0)) throw Rejected("sigma_n^2 denominator 1 - 2p(1-p)h''(p) is not positive");
  return p_star * (1.0 - p_star) * static_cast<double>(spec.n * (spec.n - 1) / 2) / denom;
}

MeasureSpec ergm_measure(const ErgmSpec& spec) {
  MeasureSpec mu;
  const std::size_t n = spec.n;
  mu.dimension = n * (n - 1) / 2;
  mu.alphabet_size = 2;
  auto shared = std::make_shared<const ErgmSpec>(spec);
  auto endpoints = std::make_shared<std::vector<std::pair<std::size_t, std::size_t>>>();
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) endpoints->emplace_back(u, v);
  mu.log_weight = [shared](const SpinConfig& x) {
    const double nd = static_cast<double>(shared->n);
    return nd * nd * hamiltonian(*shared, GraphConfig::from_spins(x, shared->n));
  };
  mu.site_log_weights = [shared, endpoints](const SpinConfig& x, std::size_t i, std::span<double> out) {
    const auto [u, v] = (*endpoints)[i];
    out[0] = 0.0;
    out[1] = flip_log_odds(*shared, GraphConfig::from_spins(x, shared->n), u, v);
  };
  mu.support = Region::full(mu.dimension);
  mu.label = "ergm";
  return mu;
}

std::vector<std::string> validate_balls(const ErgmRateAnalysis& analysis, double eta) {
  std::vector<std::string> out;
  if (!(eta > 0.0)) out.emplace_back("eta must be positive");
  auto ps = analysis.maximizers;
  std::sort(ps.begin(), ps.end());
  for (std::size_t k = 1; k < ps.size(); ++k)
    if (ps[k] - ps[k - 1] <= 2.0 * eta)
      out.push_back("eta=" + std::to_string(eta) + " exceeds half the gap between maximizers " +
                    std::to_string(ps[k - 1]) + " and " + std::to_string(ps[k]));
  return out;
}

GoodSet make_good_set(std::size_t v_max, double p_star, double epsilon) {
  if (!(epsilon > 0.0)) throw Rejected("good-set epsilon must be positive");
  return GoodSet{p_star, epsilon, v_max, probe_catalog(v_max)};
}

GammaReport gamma_membership(const GraphConfig& x, const GoodSet& gamma) {
  GammaReport rep;
  const std::size_t n = x.vertex_count();
  for (std::size_t k = 0; k < gamma.probes.size(); ++k)
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v) {
        const double d = std::abs(r_statistic(gamma.probes[k], x, u, v) - gamma.p_star);
        if (d > rep.worst_deviation) rep = GammaReport{d, k, u, v, false};
      }
  rep.member = rep.worst_deviation <= gamma.epsilon + kSlack;
  return rep;
}

bool in_gamma(const GraphConfig& x, const GoodSet& gamma) {
  const std::size_t n = x.vertex_count();
  for (const auto& g : gamma.probes)
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v)
        if (std::abs(r_statistic(g, x, u, v) - gamma.p_star) > gamma.epsilon + kSlack) return false;
  return true;
}

Region gamma_region(std::size_t n, const GoodSet& gamma) {
  auto shared = std::make_shared<const GoodSet>(gamma);
  return Region(n * (n - 1) / 2, 2, [shared, n](const SpinConfig& x) {
    return in_gamma(GraphConfig::from_spins(x, n), *shared);
  }, "gamma");
}

bool in_ball(const ErgmSpec& spec, const CutBall& ball, const GraphConfig& x) {
  if (ball.exact_for(spec.n)) return cut_norm_to_constant(x, ball.p_star, spec.n).value <= ball.eta + kSlack;
  if (std::abs(x.edge_density() - ball.p_star) > 0.5 * ball.eta + kSlack) return false;
  if (ball.gamma_epsilon)
    return in_gamma(x, make_good_set(std::max<std::size_t>(max_pattern_vertices(spec), 3), ball.p_star,
                                     *ball.gamma_epsilon));
  return true;
}

Region ball_region(const ErgmSpec& spec, const CutBall& ball) {
  auto s = std::make_shared<const ErgmSpec>(spec);
  return Region(spec.n * (spec.n - 1) / 2, 2, [s, ball](const SpinConfig& x) {
    return in_ball(*s, ball, GraphConfig::from_spins(x, s->n));
  }, ball.exact_for(spec.n) ? "cut-ball" : "cut-ball-proxy (APPROXIMATE)");
}

MeasureSpec ball_measure(const ErgmSpec& spec, const CutBall& ball) {
  return restrict_measure(ergm_measure(spec), ball_region(spec, ball), "ergm-phase");
}

PhaseChain::PhaseChain(ErgmSpec spec, CutBall ball, Rng& rng) : spec_(std::move(spec)), ball_(ball), x_(spec_.n) {
  if (!(ball_.eta > 0.0)) throw Rejected("ball radius must be positive");
  if (!(ball_.p_star > 0.0 && ball_.p_star < 1.0)) throw Rejected("p* must lie in (0,1)");
  if (ball_.exact_for(spec_.n) && spec_.n > 16) throw Rejected("exact cut-ball conditioning supports n <= 16");
  if (!ball_.exact_for(spec_.n) && ball_.gamma_epsilon)
    gamma_ = make_good_set(std::max<std::size_t>(max_pattern_vertices(spec_), 3), ball_.p_star, *ball_.gamma_epsilon);
  for (std::size_t u = 0; u < spec_.n; ++u)
    for (std::size_t v = u + 1; v < spec_.n; ++v) endpoints_.emplace_back(u, v);
  for (int attempt = 0; attempt < 100; ++attempt) {
    x_ = GraphConfig(spec_.n);
    for (const auto& [u, v] : endpoints_)
      if (rng.bernoulli(ball_.p_star)) x_.set_edge(u, v, true);
    if (ball_.exact_for(spec_.n)) tracker_.emplace(x_, ball_.p_star);
    if (accept_current()) return;
  }
  throw Rejected("warm start outside the ball after 100 attempts (eta too small)");
}

bool PhaseChain::accept_current() {
  if (tracker_) return tracker_->value() <= ball_.eta + kSlack;
  if (std::abs(x_.edge_density() - ball_.p_star) > 0.5 * ball_.eta + kSlack) return false;
  if (ball_.gamma_epsilon) return in_gamma(x_, gamma_);
  return true;
}

std::size_t PhaseChain::step(Rng& rng) {
  const auto e = static_cast<std::size_t>(rng.below(endpoints_.size()));
  const auto [u, v] = endpoints_[e];
  const double lam = flip_log_odds(spec_, x_, u, v);
  const double u01 = rng.uniform();
  const bool want = !(u01 < logistic(-lam));
  last_changed_ = false;
  last_rejected_ = false;
  if (want != x_.has_edge(u, v)) {
    x_.set_edge(u, v, want);
    if (tracker_) tracker_->flip(u, v, want);
    if (accept_current()) {
      last_changed_ = true;
    } else {
      x_.set_edge(u, v, !want);
      if (tracker_) tracker_->flip(u, v, !want);
      ++rejections_;
      last_rejected_ = true;
    }
  }
  ++steps_;
  return e;
}

SamplerResult phase_sampler(const ErgmSpec& spec, const CutBall& ball, std::uint64_t steps, Rng& rng,
                            const std::function<void(const StepRecord&, const GraphConfig&)>& observer) {
  const auto analysis = ergm_rate_analysis(spec);
  const bool ok = std::any_of(analysis.strict_maximizers.begin(), analysis.strict_maximizers.end(),
                              [&](double p) { return std::abs(p - ball.p_star) <= 1e-6; });
  if (!ok) throw Rejected("p* is not a strict maximizer of the rate function");
  PhaseChain chain(spec, ball, rng);
  for (std::uint64_t t = 0; t < steps; ++t) {
    const std::size_t e = chain.step(rng);
    if (observer) observer(StepRecord{t, e, chain.last_changed(), chain.last_rejected()}, chain.state());
  }
  return SamplerResult{chain.state(), chain.steps(), chain.rejections(), chain.approximate()};
}

double inner_radius(const CutBall& ball, std::size_t n) {
  return std::min(0.5 * ball.eta, ball.eta - 4.0 / static_cast<double>(n * n));
}

ErgmLocalFkgReport local_fkg_witness_ergm(const ErgmSpec& spec, const CutBall& ball, Mode mode, std::uint64_t samples,
                                          Rng* rng) {
  const std::size_t n = spec.n;
  const double r = inner_radius(ball, n);
  if (!(r > 0.0)) throw Rejected("inner ball radius min(eta/2, eta - 4/n^2) is not positive");
  const double n2 = static_cast<double>(n * n);
  const std::size_t k = spec.graphs.size();
  ErgmLocalFkgReport rep;
  rep.inner_radius = r;

  auto check_superadditive = [&](const std::uint64_t* cx, const std::uint64_t* cy, const std::uint64_t* cm,
                                 const std::uint64_t* cj) {
    bool strict = false;
    for (std::size_t j = 0; j < k; ++j) {
      ++rep.superadditivity_checks;
      if (cj[j] + cm[j] < cx[j] + cy[j]) ++rep.superadditivity_violations;
      if (cj[j] + cm[j] > cx[j] + cy[j]) strict = true;
    }
    if (strict) ++rep.strict_pairs;
  };

  if (mode == Mode::kExhaustive) {
    if (n > 6) throw Rejected("exhaustive local FKG check for ERGMs requires n <= 6");
    const std::size_t dim = n * (n - 1) / 2;
    const std::uint64_t states = 1ULL << dim;
    std::vector<double> lw(states);
    std::vector<bool> inside(states);
    std::vector<std::uint64_t> counts(states * k);
    for (std::uint64_t c = 0; c < states; ++c) {
      const GraphConfig g = graph_of_code(c, n);
      const double cut = cut_norm_to_constant(g, ball.p_star, n).value;
      double h = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        counts[c * k + j] = count_homomorphisms(spec.graphs[j], g);
        h += spec.beta[j] * static_cast<double>(counts[c * k + j]) / npow(n, spec.graphs[j].vertices);
      }
      lw[c] = cut <= ball.eta + kSlack ? n2 * h : kNegInf;
      inside[c] = cut <= r + kSlack;
    }
    const auto near = fkg::one_flip_neighbourhood(inside, dim);
    const auto scan = fkg::scan_near_pairs(lw, near, dim, [&](std::uint64_t x, std::uint64_t y) {
      check_superadditive(&counts[x * k], &counts[y * k], &counts[(x & y) * k], &counts[(x | y) * k]);
    });
    rep.worst_log_ratio = scan.worst_log_ratio;
    rep.pairs_checked = scan.pairs_checked;
    if (scan.witness) rep.witness = std::make_pair(graph_of_code(scan.witness->first, n), graph_of_code(scan.witness->second, n));
    return rep;
  }

  if (rng == nullptr || samples == 0) throw Rejected("sampled mode needs an rng and a positive sample count");
  PhaseChain chain(spec, ball, *rng);
  const std::size_t dim = n * (n - 1) / 2;
  auto log_mu = [&](const GraphConfig& g) {
    return in_ball(spec, ball, g) ? n2 * hamiltonian(spec, g) : kNegInf;
  };
  auto inner = [&](const GraphConfig& g) { return cut_norm_to_constant(g, ball.p_star, 16).value <= r + kSlack; };
  rep.worst_log_ratio = std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> cx(k), cy(k), cm(k), cj(k);
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (std::size_t t = 0; t < 4 * dim; ++t) chain.step(*rng);
    const GraphConfig& x = chain.state();
    if (!inner(x)) continue;
    GraphConfig y = x;
    const auto edges = x.edge_list();
    if (!edges.empty() && rng->bernoulli(0.5)) {
      const auto& [a, b] = edges[rng->below(edges.size())];
      y.set_edge(a, b, false);
    }
    const std::size_t adds = rng->below(4);
    for (std::size_t t = 0; t < adds; ++t) {
      const auto [a, b] = edge_endpoints(n, rng->below(dim));
      if (!x.has_edge(a, b)) y.set_edge(a, b, true);
    }
    if (!inner(y)) continue;
    GraphConfig m(n), j(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        if (x.has_edge(a, b) && y.has_edge(a, b)) m.set_edge(a, b, true);
        if (x.has_edge(a, b) || y.has_edge(a, b)) j.set_edge(a, b, true);
      }
    for (std::size_t q = 0; q < k; ++q) {
      cx[q] = count_homomorphisms(spec.graphs[q], x);
      cy[q] = count_homomorphisms(spec.graphs[q], y);
      cm[q] = count_homomorphisms(spec.graphs[q], m);
      cj[q] = count_homomorphisms(spec.graphs[q], j);
    }
    check_superadditive(cx.data(), cy.data(), cm.data(), cj.data());
    ++rep.pairs_checked;
    const double lm = log_mu(m), lj = log_mu(j);
    const double ratio = (lm == kNegInf || lj == kNegInf) ? kNegInf : lm + lj - log_mu(x) - log_mu(y);
    if (ratio < rep.worst_log_ratio) {
      rep.worst_log_ratio = ratio;
      if (ratio < -1e-10) rep.witness = std::make_pair(x, y);
    }
  }
  if (rep.pairs_checked == 0) rep.worst_log_ratio = 0.0;
  return rep;
}

}  // namespace afkg::ergm
