#include "afkg/gcwm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace afkg::gcwm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kBandSlack = 1e-12;

double xlogx(double m) { return m > 0.0 ? m * std::log(m) : 0.0; }

double log_sum_exp(const std::vector<double>& v) {
  double mx = kNegInf;
  for (double a : v) mx = std::max(mx, a);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double a : v)
    if (a != kNegInf) s += std::exp(a - mx);
  return mx + std::log(s);
}

// sum_j beta_j ((a+1)^j - a^j) / N^j with the integer differences formed exactly.
double exact_first_difference(const std::vector<double>& beta, std::size_t a, std::size_t n) {
  long double total = 0.0L;
  long double pa = 1.0L, pb = 1.0L, pn = 1.0L;
  for (std::size_t j = 1; j <= beta.size(); ++j) {
    pa *= static_cast<long double>(a);
    pb *= static_cast<long double>(a + 1);
    pn *= static_cast<long double>(n);
    total += static_cast<long double>(beta[j - 1]) * (pb - pa) / pn;
  }
  return static_cast<double>(total);
}

// sum_j beta_j ((b+2)^j - 2 (b+1)^j + b^j) / N^j.
double exact_second_difference(const std::vector<double>& beta, std::size_t b, std::size_t n) {
  long double total = 0.0L;
  long double p0 = 1.0L, p1 = 1.0L, p2 = 1.0L, pn = 1.0L;
  for (std::size_t j = 1; j <= beta.size(); ++j) {
    p0 *= static_cast<long double>(b);
    p1 *= static_cast<long double>(b + 1);
    p2 *= static_cast<long double>(b + 2);
    pn *= static_cast<long double>(n);
    total += static_cast<long double>(beta[j - 1]) * (p2 - 2.0L * p1 + p0) / pn;
  }
  return static_cast<double>(total);
}

StationaryPoint make_point(const std::vector<double>& beta, double m) {
  const RateValue r = rate_function(beta, m);
  StationaryPoint sp;
  sp.m = m;
  sp.rate = r.value;
  sp.rate_d1 = r.d1;
  sp.rate_d2 = r.d2;
  sp.fixed_point_residual = m - mean_field_map(beta, m);
  sp.map_derivative = mean_field_map_derivative(beta, m);
  return sp;
}

MeasureSpec level_measure(const Params& p, Region support, std::string label) {
  MeasureSpec mu;
  mu.dimension = p.n_spins;
  mu.alphabet_size = 2;
  const auto beta = p.beta;
  const auto n = p.n_spins;
  mu.log_weight = [beta, n](const SpinConfig& x) {
    return static_cast<double>(n) * poly(beta, static_cast<double>(x.count_ones()) / static_cast<double>(n));
  };
  mu.site_log_weights = [beta, n](const SpinConfig& x, std::size_t i, std::span<double> out) {
    const std::size_t a = x.count_ones() - static_cast<std::size_t>(x[i]);
    out[0] = 0.0;
    out[1] = static_cast<double>(n) * exact_first_difference(beta, a, n);
  };
  mu.support = std::move(support);
  mu.label = std::move(label);
  return mu;
}

}  // namespace

std::vector<std::string> validate_params(const std::vector<double>& beta, std::size_t n_spins) {
  std::vector<std::string> out;
  if (beta.empty()) out.emplace_back("beta must have at least one coefficient");
  for (std::size_t j = 1; j <= beta.size(); ++j) {
    if (!std::isfinite(beta[j - 1])) out.push_back("beta_" + std::to_string(j) + " is not finite");
    else if (j >= 2 && beta[j - 1] < 0.0) out.push_back("ferromagnetic violation j=" + std::to_string(j));
  }
  if (n_spins < 1) out.emplace_back("N must be positive");
  return out;
}

Params make_params(std::vector<double> beta, std::size_t n_spins) {
  const auto diags = validate_params(beta, n_spins);
  if (!diags.empty()) throw Rejected(diags.front());
  return Params{std::move(beta), n_spins};
}

double poly(const std::vector<double>& beta, double m) {
  double s = 0.0;
  for (std::size_t j = beta.size(); j >= 1; --j) s = (s + beta[j - 1]) * m;
  return s;
}

double poly_d1(const std::vector<double>& beta, double m) {
  double s = 0.0;
  for (std::size_t j = beta.size(); j >= 1; --j) s = s * m + static_cast<double>(j) * beta[j - 1];
  return s;
}

double poly_d2(const std::vector<double>& beta, double m) {
  double s = 0.0;
  for (std::size_t j = beta.size(); j >= 2; --j) s = s * m + static_cast<double>(j * (j - 1)) * beta[j - 1];
  return s;
}

double hamiltonian(const Params& p, const SpinConfig& x) {
  if (x.dimension() != p.n_spins || !x.binary()) throw Rejected("configuration does not match the model");
  return poly(p.beta, mean_value(x));
}

RateValue rate_function(const std::vector<double>& beta, double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw Rejected("magnetization outside [0,1]");
  RateValue r;
  r.value = poly(beta, m) - xlogx(m) - xlogx(1.0 - m);
  if (m == 0.0) {
    r.d1 = std::numeric_limits<double>::infinity();
    r.d2 = kNegInf;
  } else if (m == 1.0) {
    r.d1 = kNegInf;
    r.d2 = kNegInf;
  } else {
    r.d1 = poly_d1(beta, m) - std::log(m) + std::log1p(-m);
    r.d2 = poly_d2(beta, m) - 1.0 / (m * (1.0 - m));
  }
  return r;
}

double mean_field_map(const std::vector<double>& beta, double m) { return logistic(poly_d1(beta, m)); }

double mean_field_map_derivative(const std::vector<double>& beta, double m) {
  const double f = logistic(poly_d1(beta, m));
  return f * (1.0 - f) * poly_d2(beta, m);
}

RateAnalysis find_maximizers(const std::vector<double>& beta, std::size_t grid_size, double tol) {
  if (grid_size < 1000) throw Rejected("grid_size must be at least 1000");
  if (!(tol > 0.0 && tol <= 1e-8)) throw Rejected("tolerance must lie in (0, 1e-8]");
  for (double b : beta)
    if (!std::isfinite(b)) throw Rejected("beta must be finite");

  // Search in logit coordinates: L'(m) = h'(m) - s with s = log(m/(1-m)), so the
  // stationary points are the roots of g(s) = h'(logistic(s)) - s, and |h'| <= bound
  // keeps them inside [-bound, bound] however close to 0 or 1 they sit in m.
  double bound = 1.0;
  for (std::size_t j = 0; j < beta.size(); ++j) bound += static_cast<double>(j + 1) * std::abs(beta[j]);
  std::vector<double> grid;
  grid.reserve(2 * grid_size + 2);
  for (std::size_t k = 0; k <= grid_size; ++k) {
    grid.push_back(-bound + 2.0 * bound * static_cast<double>(k) / static_cast<double>(grid_size));
    if (k > 0 && k < grid_size) {
      const double m = static_cast<double>(k) / static_cast<double>(grid_size);
      grid.push_back(std::log(m / (1.0 - m)));
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  auto g = [&](double s) { return poly_d1(beta, logistic(s)) - s; };
  std::vector<double> roots;
  double prev_s = grid.front();
  double prev_v = g(prev_s);
  if (prev_v == 0.0) roots.push_back(prev_s);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double s = grid[k];
    const double v = g(s);
    if (v == 0.0) {
      roots.push_back(s);
    } else if (prev_v != 0.0 && (prev_v > 0.0) != (v > 0.0)) {
      double lo = prev_s, hi = s;
      const bool lo_positive = prev_v > 0.0;
      double mid = 0.5 * (lo + hi);
      for (int it = 0; it < 400; ++it) {
        mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (gm == 0.0) break;
        if ((gm > 0.0) == lo_positive) lo = mid;
        else hi = mid;
      }
      roots.push_back(mid);
    }
    prev_s = s;
    prev_v = v;
  }
  if (roots.empty()) throw Rejected("no stationary point of the rate function found");
  for (double& s : roots) {
    const double m = logistic(s);
    if (!(m > 0.0 && m < 1.0)) {
      char buf[120];
      std::snprintf(buf, sizeof buf, "stationary point at logit %.6g is not representable in double precision", s);
      throw Rejected(buf);
    }
    s = m;
  }

  RateAnalysis a;
  a.tolerance = tol;
  for (double m : roots) a.stationary_points.push_back(make_point(beta, m));
  double best = kNegInf;
  for (const auto& sp : a.stationary_points) best = std::max(best, sp.rate);
  for (const auto& sp : a.stationary_points) {
    if (sp.rate < best - tol) continue;
    a.maximizers.push_back(sp.m);
    if (sp.rate_d2 < -tol) a.strict_maximizers.push_back(sp.m);
    else a.critical_excluded.push_back(sp.m);
  }
  return a;
}

LemmaCheck check_lemma_equiv(const std::vector<double>& beta, double m, double tol) {
  if (!(m > 0.0 && m < 1.0)) throw Rejected("m must lie in (0,1)");
  const RateValue r = rate_function(beta, m);
  LemmaCheck c;
  c.concave_stationary = std::abs(r.d1) <= tol && r.d2 < 0.0;
  c.attracting_fixed_point =
      std::abs(m - mean_field_map(beta, m)) <= tol && mean_field_map_derivative(beta, m) < 1.0;
  return c;
}

PhaseBand make_band(double m_star, double eta, double epsilon) {
  if (!(m_star >= 0.0 && m_star <= 1.0)) throw Rejected("m_star outside [0,1]");
  if (!(eta > 0.0)) throw Rejected("eta must be positive");
  if (!(epsilon > 0.0 && epsilon < eta)) throw Rejected("epsilon must lie in (0, eta)");
  return PhaseBand{m_star, eta, epsilon};
}

PhaseBand default_band(const RateAnalysis& analysis, double m_star) {
  double eta = 0.1;
  auto ms = analysis.maximizers;
  std::sort(ms.begin(), ms.end());
  for (std::size_t k = 1; k < ms.size(); ++k) eta = std::min(eta, 0.5 * (ms[k] - ms[k - 1]) * (1.0 - 1e-9));
  return make_band(m_star, eta, eta / 2.0);
}

std::vector<std::string> validate_bands(const RateAnalysis& analysis, double eta, double epsilon) {
  std::vector<std::string> out;
  if (!(eta > 0.0)) out.emplace_back("eta must be positive");
  if (!(epsilon > 0.0 && epsilon < eta)) out.emplace_back("epsilon must lie in (0, eta)");
  auto ms = analysis.maximizers;
  std::sort(ms.begin(), ms.end());
  for (std::size_t k = 1; k < ms.size(); ++k) {
    if (ms[k] - ms[k - 1] <= 2.0 * eta) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "eta=%.6g exceeds half the gap between maximizers %.9g and %.9g", eta, ms[k - 1],
                    ms[k]);
      out.emplace_back(buf);
    }
  }
  return out;
}

std::pair<std::size_t, std::size_t> band_levels(std::size_t n_spins, double center, double half_width) {
  const double n = static_cast<double>(n_spins);
  auto inside = [&](std::size_t k) { return std::abs(static_cast<double>(k) / n - center) <= half_width + kBandSlack; };
  const double lo_guess = std::clamp(std::floor((center - half_width) * n), 0.0, n);
  const double hi_guess = std::clamp(std::ceil((center + half_width) * n), 0.0, n);
  auto lo = static_cast<std::size_t>(lo_guess);
  auto hi = static_cast<std::size_t>(hi_guess);
  while (lo > 0 && inside(lo - 1)) --lo;
  while (lo <= n_spins && !inside(lo)) ++lo;
  while (hi < n_spins && inside(hi + 1)) ++hi;
  while (hi > 0 && hi >= lo && !inside(hi)) --hi;
  if (lo > n_spins || !inside(hi)) return {1, 0};
  return {lo, hi};
}

double MagnetizationLaw::probability(std::size_t k) const {
  return k < log_probabilities.size() ? std::exp(log_probabilities[k]) : 0.0;
}

double MagnetizationLaw::mean_level() const {
  double s = 0.0;
  for (std::size_t k = 0; k < log_probabilities.size(); ++k) s += static_cast<double>(k) * probability(k);
  return s;
}

double MagnetizationLaw::variance_level() const {
  const double mean = mean_level();
  double s = 0.0;
  for (std::size_t k = 0; k < log_probabilities.size(); ++k) {
    const double d = static_cast<double>(k) - mean;
    s += d * d * probability(k);
  }
  return s;
}

SpinConfig MagnetizationLaw::sample(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t level = log_probabilities.size() - 1;
  while (level > 0 && log_probabilities[level] == kNegInf) --level;
  for (std::size_t k = 0; k < log_probabilities.size(); ++k) {
    const double pk = probability(k);
    if (pk == 0.0) continue;
    acc += pk;
    if (u < acc) {
      level = k;
      break;
    }
  }
  std::vector<std::size_t> idx(n_spins);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SpinConfig x(n_spins);
  for (std::size_t t = 0; t < level; ++t) {
    const std::size_t j = t + static_cast<std::size_t>(rng.below(n_spins - t));
    std::swap(idx[t], idx[j]);
    x.set(idx[t], 1);
  }
  return x;
}

MagnetizationLaw exact_magnetization_law(const Params& p, const std::optional<PhaseBand>& band) {
  const std::size_t n = p.n_spins;
  if (n > 1000000) throw Rejected("exact magnetization law supports N <= 10^6");
  if (n < 1) throw Rejected("N must be positive");
  std::vector<double> lw(n + 1);
  double log_binom = 0.0;
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k <= n; ++k) {
    if (k > 0) log_binom += std::log(static_cast<double>(n - k + 1)) - std::log(static_cast<double>(k));
    lw[k] = log_binom + nd * poly(p.beta, static_cast<double>(k) / nd);
  }
  if (band) {
    const auto [lo, hi] = band_levels(n, band->m_star, band->eta);
    if (lo > hi) throw Rejected("phase band contains no magnetization level");
    for (std::size_t k = 0; k <= n; ++k)
      if (k < lo || k > hi) lw[k] = kNegInf;
  }
  const double z = log_sum_exp(lw);
  for (double& v : lw)
    if (v != kNegInf) v -= z;
  return MagnetizationLaw{n, std::move(lw), band};
}

MagnetizationLaw restrict_levels(const MagnetizationLaw& law, std::size_t lo, std::size_t hi) {
  MagnetizationLaw out = law;
  for (std::size_t k = 0; k < out.log_probabilities.size(); ++k)
    if (k < lo || k > hi) out.log_probabilities[k] = kNegInf;
  const double z = log_sum_exp(out.log_probabilities);
  if (z == kNegInf) throw Rejected("level range carries no mass");
  for (double& v : out.log_probabilities)
    if (v != kNegInf) v -= z;
  return out;
}

ExchangeableMoments exchangeable_moments(const MagnetizationLaw& law) {
  const std::size_t n = law.n_spins;
  if (n < 2) throw Rejected("exchangeable moments need N >= 2");
  const double nd = static_cast<double>(n);
  double ek = 0.0, ekk1 = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double pk = law.probability(k);
    const double kd = static_cast<double>(k);
    ek += kd * pk;
    ekk1 += kd * (kd - 1.0) * pk;
  }
  ExchangeableMoments m;
  m.mean_x1 = ek / nd;
  m.cov_x1_x2 = ekk1 / (nd * (nd - 1.0)) - m.mean_x1 * m.mean_x1;
  m.var_sum = law.variance_level();
  return m;
}

double mass_outside_bands(const MagnetizationLaw& law, const std::vector<double>& centers, double eta) {
  const double nd = static_cast<double>(law.n_spins);
  double s = 0.0;
  for (std::size_t k = 0; k <= law.n_spins; ++k) {
    const double m = static_cast<double>(k) / nd;
    bool inside = false;
    for (double c : centers) inside = inside || std::abs(m - c) <= eta + kBandSlack;
    if (!inside) s += law.probability(k);
  }
  return s;
}

PartialReport discrete_partial(const Params& p, const SpinConfig& x, std::size_t i) {
  if (x.dimension() != p.n_spins || i >= p.n_spins) throw Rejected("coordinate or dimension mismatch");
  const std::size_t a = x.count_ones() - static_cast<std::size_t>(x[i]);
  const double nd = static_cast<double>(p.n_spins);
  PartialReport r;
  r.exact = exact_first_difference(p.beta, a, p.n_spins);
  const double m = static_cast<double>(a) / nd;
  double lead = 0.0;
  double mp = 1.0;
  for (std::size_t j = 1; j <= p.beta.size(); ++j) {
    lead += p.beta[j - 1] * static_cast<double>(j) * mp;
    mp *= m;
  }
  r.leading_order = lead / nd;
  return r;
}

PartialReport discrete_partial2(const Params& p, const SpinConfig& x, std::size_t i, std::size_t j) {
  if (x.dimension() != p.n_spins || i >= p.n_spins || j >= p.n_spins) throw Rejected("coordinate or dimension mismatch");
  if (i == j) throw Rejected("mixed difference needs i != j");
  const std::size_t b = x.count_ones() - static_cast<std::size_t>(x[i]) - static_cast<std::size_t>(x[j]);
  const double nd = static_cast<double>(p.n_spins);
  PartialReport r;
  r.exact = exact_second_difference(p.beta, b, p.n_spins);
  const double m = static_cast<double>(b) / nd;
  double lead = 0.0;
  double mp = 1.0;
  for (std::size_t k = 2; k <= p.beta.size(); ++k) {
    lead += p.beta[k - 1] * static_cast<double>(k * (k - 1)) * mp;
    mp *= m;
  }
  r.leading_order = lead / (nd * nd);
  return r;
}

Distance level_band_diameter(std::size_t n_spins, std::size_t lo, std::size_t hi) {
  if (lo > hi || hi > n_spins) throw Rejected("invalid level range");
  if (lo == hi) return (lo == 0 || lo == n_spins) ? 0 : kInfinite;
  if (2 * lo <= n_spins && n_spins <= 2 * hi) return n_spins;
  if (2 * hi < n_spins) return 2 * hi;
  return 2 * (n_spins - lo);
}

Region level_region(std::size_t n_spins, std::size_t lo, std::size_t hi, std::string label) {
  Region r(n_spins, 2, [lo, hi](const SpinConfig& x) {
    const std::size_t k = x.count_ones();
    return k >= lo && k <= hi;
  }, std::move(label));
  r.with_certified_diameter(level_band_diameter(n_spins, lo, hi));
  return r;
}

MeasureSpec full_measure(const Params& p) { return level_measure(p, Region::full(p.n_spins), "gcwm"); }

MeasureSpec phase_measure(const Params& p, const PhaseBand& band) {
  const auto [lo, hi] = band_levels(p.n_spins, band.m_star, band.eta);
  if (lo > hi) throw Rejected("phase band contains no magnetization level");
  return level_measure(p, level_region(p.n_spins, lo, hi, "gcwm-band"), "gcwm-phase");
}

Region inner_region(const Params& p, const PhaseBand& band) {
  const auto [lo, hi] = band_levels(p.n_spins, band.m_star, band.epsilon);
  if (lo > hi) throw Rejected("inner band contains no magnetization level");
  return level_region(p.n_spins, lo, hi, "gcwm-inner");
}

PairSampler inner_pair_sampler(const Params& p, const PhaseBand& band) {
  const auto [lo, hi] = band_levels(p.n_spins, band.m_star, band.epsilon);
  if (lo > hi) throw Rejected("inner band contains no magnetization level");
  if (lo == hi) throw Rejected("inner band is a single level: no adjacent pairs inside it");
  auto law = std::make_shared<const MagnetizationLaw>(restrict_levels(exact_magnetization_law(p, band), lo, hi));
  const std::size_t n = p.n_spins;
  return [law, lo, hi, n](Rng& rng) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      SpinConfig a = law->sample(rng);
      SpinConfig b = a;
      b.flip(static_cast<std::size_t>(rng.below(n)));
      const std::size_t k = b.count_ones();
      if (k >= lo && k <= hi) return std::make_pair(std::move(a), std::move(b));
    }
    throw Rejected("could not draw an adjacent pair inside the inner band");
  };
}

double predicted_kappa(const std::vector<double>& beta, double m_star) {
  return 1.0 - mean_field_map_derivative(beta, m_star);
}

LocalFkgReport local_fkg_witness(const Params& p, const PhaseBand& band, Mode mode, std::uint64_t samples, Rng* rng) {
  const std::size_t n = p.n_spins;
  const auto [olo, ohi] = band_levels(n, band.m_star, band.eta);
  const auto [ilo, ihi] = band_levels(n, band.m_star, band.epsilon);
  if (olo > ohi) throw Rejected("phase band contains no magnetization level");
  const double nd = static_cast<double>(n);

  // log mu depends on the level only; -inf outside the outer band.
  std::vector<double> lw(n + 1, kNegInf);
  for (std::size_t k = olo; k <= ohi; ++k) lw[k] = nd * poly(p.beta, static_cast<double>(k) / nd);
  auto near = [&](std::size_t k) {
    if (ilo > ihi) return false;
    return k + 1 >= ilo && k <= ihi + 1;
  };

  LocalFkgReport rep;
  rep.worst_log_ratio = std::numeric_limits<double>::infinity();
  auto visit = [&](std::size_t kx, std::size_t ky, std::size_t kmeet, std::size_t kjoin, auto&& make_pair) {
    ++rep.pairs_checked;
    const double mx = static_cast<double>(kx) / nd, my = static_cast<double>(ky) / nd;
    const double mm = static_cast<double>(kmeet) / nd, mj = static_cast<double>(kjoin) / nd;
    double px = 1, py = 1, pm = 1, pj = 1;
    bool bad = false;
    for (std::size_t j = 1; j <= p.beta.size(); ++j) {
      px *= mx;
      py *= my;
      pm *= mm;
      pj *= mj;
      if (pj + pm < px + py - 1e-12) bad = true;
    }
    if (bad) ++rep.superadditivity_violations;
    if (lw[kx] == kNegInf || lw[ky] == kNegInf) return;
    const double r = (lw[kjoin] == kNegInf || lw[kmeet] == kNegInf) ? kNegInf
                                                                     : lw[kjoin] + lw[kmeet] - lw[kx] - lw[ky];
    if (r < rep.worst_log_ratio) {
      rep.worst_log_ratio = r;
      if (r < -1e-10) rep.witness = make_pair();
    }
  };

  if (mode == Mode::kExhaustive) {
    if (n > 12) throw Rejected("exhaustive local FKG check requires N <= 12");
    const std::uint64_t states = 1ULL << n;
    for (std::uint64_t x = 0; x < states; ++x) {
      const auto kx = static_cast<std::size_t>(std::popcount(x));
      if (!near(kx)) continue;
      for (std::uint64_t y = 0; y < states; ++y) {
        const auto ky = static_cast<std::size_t>(std::popcount(y));
        if (!near(ky)) continue;
        const auto a = std::popcount(x & ~y), b = std::popcount(y & ~x);
        if (std::min(a, b) > 1) continue;
        visit(kx, ky, static_cast<std::size_t>(std::popcount(x & y)), static_cast<std::size_t>(std::popcount(x | y)),
              [&] { return std::make_pair(SpinConfig::from_code(x, n), SpinConfig::from_code(y, n)); });
      }
    }
  } else {
    if (rng == nullptr || samples == 0) throw Rejected("sampled mode needs an rng and a positive sample count");
    std::vector<std::size_t> near_levels;
    for (std::size_t k = 0; k <= n; ++k)
      if (near(k)) near_levels.push_back(k);
    if (near_levels.empty()) throw Rejected("inner band contains no magnetization level");
    for (std::uint64_t s = 0; s < samples; ++s) {
      const std::size_t kx = near_levels[rng->below(near_levels.size())];
      const std::size_t ky = near_levels[rng->below(near_levels.size())];
      // y removes `small` of x's ones and adds the rest from x's zeros (or the mirror).
      const std::size_t small = rng->below(2);
      std::size_t removed, added;
      if (rng->below(2) == 0) {
        removed = std::min<std::size_t>(small, kx);
        if (ky + removed < kx || ky + removed - kx > n - kx) continue;
        added = ky + removed - kx;
      } else {
        added = std::min<std::size_t>(small, n - kx);
        if (kx + added < ky || kx + added - ky > kx) continue;
        removed = kx + added - ky;
      }
      visit(kx, ky, kx - removed, kx + added, [&] {
        SpinConfig x(n), y(n);
        for (std::size_t i = 0; i < kx; ++i) x.set(i, 1);
        for (std::size_t i = removed; i < kx + added; ++i) y.set(i, 1);
        return std::make_pair(x, y);
      });
    }
  }
  if (rep.pairs_checked == 0) rep.worst_log_ratio = 0.0;
  return rep;
}

}  // namespace afkg::gcwm
