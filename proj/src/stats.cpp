#include "afkg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "afkg/parallel.hpp"

namespace afkg::stats {
namespace {

const boost::math::normal kStdNormal;

double Phi(double z) { return boost::math::cdf(kStdNormal, z); }
double phi(double z) { return boost::math::pdf(kStdNormal, z); }

// Antiderivative of Phi: d/dz (z Phi(z) + phi(z)) = Phi(z).
double Phi_integral(double z) { return z * Phi(z) + phi(z); }

// int_a^b |c - Phi(z)| dz for a constant c in [0,1] and finite a < b.
double abs_gap_integral(double a, double b, double c) {
  const double lo = Phi(a), hi = Phi(b);
  const auto plain = [&](double l, double r, double sign) {
    return sign * (c * (r - l) - (Phi_integral(r) - Phi_integral(l)));
  };
  if (c <= lo) return -plain(a, b, 1.0);
  if (c >= hi) return plain(a, b, 1.0);
  const double q = boost::math::quantile(kStdNormal, c);
  return plain(a, q, 1.0) - plain(q, b, 1.0);
}

std::vector<double> covariance_table(const std::vector<double>& mean, const std::vector<double>& second,
                                     std::size_t dim) {
  std::vector<double> cov(dim * dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) cov[i * dim + j] = second[i * dim + j] - mean[i] * mean[j];
  return cov;
}

void check_lip(const std::vector<double>& lip, std::size_t dim, const char* name) {
  if (lip.size() != dim) throw Rejected(std::string("Lip constants for ") + name + " have the wrong length");
  for (double l : lip)
    if (!std::isfinite(l) || l < 0.0) throw Rejected(std::string("Lip constants for ") + name + " must be finite and >= 0");
}

double pairs_total(std::size_t n) { return static_cast<double>(n * (n - 1) / 2); }

}  // namespace

std::vector<double> lipschitz_constants(const Function& f, std::size_t dimension) {
  if (dimension > 20) throw Rejected("exhaustive Lip constants need N <= 20");
  const std::uint64_t count = 1ULL << dimension;
  std::vector<double> table(count);
  for (std::uint64_t c = 0; c < count; ++c) table[c] = f(SpinConfig::from_code(c, dimension));
  std::vector<double> lip(dimension, 0.0);
  for (std::uint64_t c = 0; c < count; ++c)
    for (std::size_t i = 0; i < dimension; ++i)
      if (!((c >> i) & 1ULL)) lip[i] = std::max(lip[i], std::abs(table[c | (1ULL << i)] - table[c]));
  return lip;
}

double covariance_rhs(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& cov,
                      double delta, double interval_length) {
  const std::size_t dim = a.size();
  const double shift = 4.0 * interval_length * interval_length * delta;
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < dim; ++j) s += a[i] * b[j] * (cov[i * dim + j] + shift);
  }
  return s;
}

CovBoundCheck cov_bound_check(const ExactDistribution& law, const Function& f, const Function& g, double delta,
                              std::optional<std::vector<double>> lip_f, std::optional<std::vector<double>> lip_g) {
  if (law.alphabet_size != 2) throw Rejected("covariance check supports binary spins");
  if (!(delta >= 0.0)) throw Rejected("delta must be >= 0");
  const std::size_t dim = law.dimension;
  if ((!lip_f || !lip_g) && dim > 12) throw Rejected("exhaustive Lip constants need N <= 12");
  CovBoundCheck out;
  out.delta = delta;
  out.exact = true;
  out.lip_f = lip_f ? std::move(*lip_f) : lipschitz_constants(f, dim);
  out.lip_g = lip_g ? std::move(*lip_g) : lipschitz_constants(g, dim);
  check_lip(out.lip_f, dim, "F");
  check_lip(out.lip_g, dim, "G");

  std::vector<double> mean(dim, 0.0), second(dim * dim, 0.0);
  double ef = 0.0, eg = 0.0, efg = 0.0;
  for (std::uint64_t c = 0; c < law.size(); ++c) {
    const double p = law.prob[c];
    if (p == 0.0) continue;
    const SpinConfig x = law.config(c);
    const double fx = f(x), gx = g(x);
    ef += p * fx;
    eg += p * gx;
    efg += p * fx * gx;
    for (std::size_t i = 0; i < dim; ++i) {
      if (!((c >> i) & 1ULL)) continue;
      mean[i] += p;
      for (std::size_t j = 0; j < dim; ++j)
        if ((c >> j) & 1ULL) second[i * dim + j] += p;
    }
  }
  out.covariance = covariance_table(mean, second, dim);
  out.lhs = std::abs(efg - ef * eg);
  out.rhs = covariance_rhs(out.lip_f, out.lip_g, out.covariance, delta);
  return out;
}

CovBoundCheck cov_bound_check(const std::vector<SpinConfig>& samples, const Function& f, const Function& g,
                              double delta, const std::optional<std::vector<double>>& lip_f,
                              const std::optional<std::vector<double>>& lip_g) {
  if (!lip_f || !lip_g) throw Rejected("sampled mode requires Lip constants for both functions");
  if (samples.size() < 2) throw Rejected("sampled mode needs at least 2 samples");
  if (!(delta >= 0.0)) throw Rejected("delta must be >= 0");
  const std::size_t dim = samples.front().dimension();
  check_lip(*lip_f, dim, "F");
  check_lip(*lip_g, dim, "G");
  CovBoundCheck out;
  out.delta = delta;
  out.exact = false;
  out.lip_f = *lip_f;
  out.lip_g = *lip_g;
  out.sample_count = samples.size();
  const double m = static_cast<double>(samples.size());
  std::vector<double> mean(dim, 0.0), second(dim * dim, 0.0);
  double ef = 0.0, eg = 0.0, efg = 0.0;
  for (const auto& x : samples) {
    if (x.dimension() != dim || !x.binary()) throw Rejected("samples must be binary of equal dimension");
    const double fx = f(x), gx = g(x);
    ef += fx;
    eg += gx;
    efg += fx * gx;
    for (std::size_t i = 0; i < dim; ++i) {
      if (!x[i]) continue;
      mean[i] += 1.0;
      for (std::size_t j = 0; j < dim; ++j)
        if (x[j]) second[i * dim + j] += 1.0;
    }
  }
  for (auto& v : mean) v /= m;
  for (auto& v : second) v /= m;
  out.covariance = covariance_table(mean, second, dim);
  out.lhs = std::abs(efg / m - (ef / m) * (eg / m));
  out.rhs = covariance_rhs(out.lip_f, out.lip_g, out.covariance, delta);
  return out;
}

SeriesMean batch_means(const std::vector<double>& series, std::size_t batches) {
  SeriesMean out;
  out.count = series.size();
  if (series.empty()) throw Rejected("empty series");
  out.mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  batches = std::min(batches, series.size());
  if (batches < 2) return out;
  const std::size_t len = series.size() / batches;
  double ss = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t t = b * len; t < (b + 1) * len; ++t) s += series[t];
    const double d = s / static_cast<double>(len) - out.mean;
    ss += d * d;
  }
  out.standard_error = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  return out;
}

double autocorrelation_time(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 100) throw Rejected("autocorrelation time needs at least 100 points");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> c(series.size());
  for (std::size_t t = 0; t < n; ++t) c[t] = series[t] - mean;
  const auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += c[t] * c[t + lag];
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (c0 == 0.0) return 0.5;
  double tau = -0.5;
  for (std::size_t m = 0; 2 * m + 1 < n / 2; ++m) {
    const double pair = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
    if (pair <= 0.0) break;
    tau += pair;
  }
  return std::max(tau, 0.5);
}

std::pair<double, double> ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Rejected("regression needs at least two points");
  const double m = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Rejected("regression needs distinct x values");
  const double b = sxy / sxx;
  if (x.size() < 3) return {b, 0.0};
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - my - b * (x[i] - mx);
    rss += r * r;
  }
  return {b, std::sqrt(rss / (m - 2.0) / sxx)};
}

ChiSquare chi_square_test(const std::vector<std::uint64_t>& observed, const std::vector<double>& expected_prob) {
  if (observed.size() != expected_prob.size() || observed.empty()) throw Rejected("observed/expected size mismatch");
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  if (total == 0.0) throw Rejected("no observations");
  std::vector<double> obs, exp;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o += static_cast<double>(observed[i]);
    e += total * expected_prob[i];
    if (e >= 5.0) {
      obs.push_back(o);
      exp.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp.empty()) {
      obs.push_back(o);
      exp.push_back(e);
    } else {
      obs.back() += o;
      exp.back() += e;
    }
  }
  ChiSquare out;
  out.bins = obs.size();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (exp[i] == 0.0) {
      if (obs[i] > 0.0) out.statistic = std::numeric_limits<double>::infinity();
      continue;
    }
    out.statistic += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  }
  out.dof = out.bins > 1 ? out.bins - 1 : 0;
  if (out.dof == 0) return out;
  out.p_value = std::isfinite(out.statistic)
                    ? boost::math::cdf(boost::math::complement(boost::math::chi_squared(static_cast<double>(out.dof)),
                                                               out.statistic))
                    : 0.0;
  return out;
}

MultilinearProbe::MultilinearProbe(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges,
                                   std::pair<std::size_t, std::size_t> reference, Symmetrize mode)
    : n_(n), edges_(std::move(edges)), reference_(reference), mode_(mode) {
  if (edges_.empty() || edges_.size() > 4) throw Rejected("multilinear probe needs 1 <= k <= 4 edges");
  for (auto& [u, v] : edges_) {
    if (u == v || u >= n || v >= n) throw Rejected("probe edge out of range");
    if (u > v) std::swap(u, v);
  }
  if (reference_.first == reference_.second || reference_.first >= n || reference_.second >= n)
    throw Rejected("reference edge out of range");
  for (std::size_t a = 0; a < edges_.size(); ++a)
    for (std::size_t b = a + 1; b < edges_.size(); ++b)
      if (edges_[a] == edges_[b]) throw Rejected("probe edges must be distinct");
  if (mode_ == Symmetrize::kOrbit) {
    if (edges_.size() > 2) throw Rejected("orbit averaging supports k <= 2");
    if (edges_.size() == 2) {
      const auto [a, b] = edges_[0];
      const auto [c, d] = edges_[1];
      adjacent_ = a == c || a == d || b == c || b == d;
      if (!adjacent_ && n_ < 4) throw Rejected("disjoint edges need n >= 4");
    }
  }
}

void MultilinearProbe::observe(const ergm::GraphConfig& x) {
  if (x.vertex_count() != n_) throw Rejected("probe graph has the wrong vertex count");
  if (mode_ == Symmetrize::kNone) {
    double prod = 1.0;
    for (const auto& [u, v] : edges_) prod *= x.has_edge(u, v) ? 1.0 : 0.0;
    products_.push_back(prod);
    singles_.push_back(x.has_edge(reference_.first, reference_.second) ? 1.0 : 0.0);
    return;
  }
  const double pairs = pairs_total(n_);
  const double e = static_cast<double>(x.edge_count());
  singles_.push_back(e / pairs);
  if (edges_.size() == 1) {
    products_.push_back(e / pairs);
    return;
  }
  double two_stars = 0.0;
  for (std::size_t v = 0; v < n_; ++v) {
    const double d = static_cast<double>(x.degree(v));
    two_stars += 0.5 * d * (d - 1.0);
  }
  const double nn = static_cast<double>(n_);
  const double adjacent_total = nn * 0.5 * (nn - 1.0) * (nn - 2.0);
  if (adjacent_) {
    products_.push_back(two_stars / adjacent_total);
  } else {
    const double disjoint_total = 0.5 * pairs * (pairs - 1.0) - adjacent_total;
    products_.push_back((0.5 * e * (e - 1.0) - two_stars) / disjoint_total);
  }
}

MultilinearPoint MultilinearProbe::result() const {
  if (products_.size() < 100) throw Rejected("multilinear probe needs at least 100 observations");
  MultilinearPoint out;
  out.n = n_;
  out.samples = products_.size();
  const double k = static_cast<double>(edges_.size());
  const SeriesMean p = batch_means(products_);
  const SeriesMean s = batch_means(singles_);
  out.product_mean = p.mean;
  out.edge_mean = s.mean;
  out.edge_standard_error = s.standard_error;
  const double signed_dev = p.mean - std::pow(s.mean, k);
  out.deviation = std::abs(signed_dev);
  // Delta method on P - S^k with batch means of the linearized series.
  const double slope = k * std::pow(s.mean, k - 1.0);
  std::vector<double> lin(products_.size());
  for (std::size_t t = 0; t < lin.size(); ++t) lin[t] = products_[t] - slope * singles_[t];
  out.standard_error = batch_means(lin).standard_error;
  out.ci_low = std::max(0.0, out.deviation - 1.96 * out.standard_error);
  out.ci_high = out.deviation + 1.96 * out.standard_error;
  return out;
}

void fit_slope(MultilinearReport& report) {
  std::vector<double> lx, ly;
  for (const auto& pt : report.points) {
    if (!(pt.deviation > 0.0)) throw Rejected("zero deviation at n=" + std::to_string(pt.n) + "; slope undefined");
    lx.push_back(std::log(static_cast<double>(pt.n)));
    ly.push_back(std::log(pt.deviation));
  }
  const auto [b, se] = ols_slope(lx, ly);
  report.slope = b;
  report.slope_standard_error = se;
}

MultilinearReport multilinear_probe(const ergm::ErgmSpec& spec, const ergm::CutBall& ball,
                                    const std::vector<std::size_t>& n_grid, std::size_t k, bool adjacent,
                                    std::uint64_t samples, std::uint64_t record_every, std::uint64_t burn_in,
                                    std::uint64_t seed) {
  if (k < 1 || k > 2) throw Rejected("orbit probe supports k in {1, 2}");
  if (record_every == 0) throw Rejected("record_every must be positive");
  MultilinearReport report;
  report.points.resize(n_grid.size());
  report.marginals.resize(n_grid.size());
  parallel_for(n_grid.size(), worker_count(), [&](std::size_t idx) {
    const std::size_t n = n_grid[idx];
    const auto s = ergm::with_vertices(spec, n);
    Rng rng = Rng::derive(seed, tag_hash("multilinear"), n);
    std::vector<std::pair<std::size_t, std::size_t>> edges{{0, 1}};
    if (k == 2) edges.push_back(adjacent ? std::pair<std::size_t, std::size_t>{0, 2} : std::pair<std::size_t, std::size_t>{2, 3});
    MultilinearProbe probe(n, edges, {0, 1}, Symmetrize::kOrbit);
    ergm::PhaseChain chain(s, ball, rng);
    for (std::uint64_t t = 0; t < burn_in; ++t) chain.step(rng);
    for (std::uint64_t i = 0; i < samples; ++i) {
      for (std::uint64_t t = 0; t < record_every; ++t) chain.step(rng);
      probe.observe(chain.state());
    }
    report.points[idx] = probe.result();
    const auto& pt = report.points[idx];
    report.marginals[idx] = marginal_point(pt.edge_mean, pt.edge_standard_error, pt.samples, ball.p_star, n);
  });
  if (report.points.size() >= 2) fit_slope(report);
  return report;
}

MarginalPoint marginal_point(double edge_mean, double standard_error, std::uint64_t samples, double p_star,
                             std::size_t n) {
  if (n < 2) throw Rejected("marginal probe needs n >= 2");
  MarginalPoint out;
  out.n = n;
  out.samples = samples;
  out.edge_mean = edge_mean;
  out.deviation = std::abs(edge_mean - p_star);
  out.standard_error = standard_error;
  out.ci_low = std::max(0.0, out.deviation - 1.96 * standard_error);
  out.ci_high = out.deviation + 1.96 * standard_error;
  const double nn = static_cast<double>(n);
  out.envelope = std::sqrt(std::log(nn) / nn);
  return out;
}

MarginalPoint marginal_point(const std::vector<double>& densities, double p_star, std::size_t n) {
  if (densities.size() < 100) throw Rejected("marginal probe needs at least 100 observations");
  const SeriesMean s = batch_means(densities);
  return marginal_point(s.mean, s.standard_error, densities.size(), p_star, n);
}

NormalDistance normal_distance(const std::vector<std::pair<double, double>>& atoms, double center, double scale) {
  if (!(scale > 0.0)) throw Rejected("scale must be positive");
  std::vector<std::pair<double, double>> z;
  z.reserve(atoms.size());
  for (const auto& [v, p] : atoms) {
    if (!(p >= 0.0)) throw Rejected("negative probability");
    if (p > 0.0) z.emplace_back((v - center) / scale, p);
  }
  if (z.empty()) throw Rejected("law has no atoms");
  std::sort(z.begin(), z.end());
  double total = 0.0;
  for (const auto& a : z) total += a.second;
  NormalDistance out;
  double cdf = 0.0;
  out.wasserstein = Phi_integral(z.front().first);
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double at = Phi(z[k].first);
    out.kolmogorov = std::max(out.kolmogorov, std::abs(cdf - at));
    cdf = std::min(1.0, cdf + z[k].second / total);
    out.kolmogorov = std::max(out.kolmogorov, std::abs(cdf - at));
    if (k + 1 < z.size()) out.wasserstein += abs_gap_integral(z[k].first, z[k + 1].first, cdf);
  }
  // int_{z_last}^inf (1 - Phi) = phi(z) - z (1 - Phi(z)).
  const double zl = z.back().first;
  out.wasserstein += phi(zl) - zl * boost::math::cdf(boost::math::complement(kStdNormal, zl));
  return out;
}

NormalDistance normal_distance(std::vector<double> samples, double center, double scale) {
  if (!(scale > 0.0)) throw Rejected("scale must be positive");
  if (samples.size() < 100) throw Rejected("normal_distance needs at least 100 samples");
  for (auto& v : samples) v = (v - center) / scale;
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  NormalDistance out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = Phi(samples[i]);
    const double idx = static_cast<double>(i);
    out.kolmogorov = std::max({out.kolmogorov, (idx + 1.0) / m - f, f - idx / m});
    out.wasserstein += std::abs(samples[i] - boost::math::quantile(kStdNormal, (idx + 0.5) / m));
  }
  out.wasserstein /= m;
  return out;
}

double gcwm_mean_field_variance(const std::vector<double>& beta, double m_star, std::size_t n_spins) {
  const double q = m_star * (1.0 - m_star);
  const double denom = 1.0 - q * gcwm::poly_d2(beta, m_star);
  if (!(denom > 0.0)) throw Rejected("mean-field variance denominator 1 - m(1-m)h''(m) is not positive");
  return static_cast<double>(n_spins) * q / denom;
}

std::vector<CltReport> clt_report_gcwm(const std::vector<double>& beta, double m_star, double eta,
                                       const std::vector<std::size_t>& n_grid) {
  std::vector<CltReport> out;
  const auto band = gcwm::make_band(m_star, eta, 0.5 * eta);
  for (std::size_t n : n_grid) {
    const auto params = gcwm::make_params(beta, n);
    const auto law = gcwm::exact_magnetization_law(params, band);
    CltReport r;
    r.statistic = "magnetization sum";
    r.exact = true;
    r.size = n;
    r.mean = law.mean_level();
    r.variance = law.variance_level();
    if (!(r.variance > 0.0)) throw Rejected("phase law is degenerate at N=" + std::to_string(n));
    r.scale = std::sqrt(r.variance);
    r.scale_formula = "exact standard deviation";
    r.predicted_variance = gcwm_mean_field_variance(beta, m_star, n);
    r.variance_ratio = r.variance / r.predicted_variance;
    std::vector<std::pair<double, double>> atoms;
    for (std::size_t k = 0; k <= n; ++k) {
      const double p = law.probability(k);
      if (p > 0.0) atoms.emplace_back(static_cast<double>(k), p);
    }
    r.distance = normal_distance(atoms, r.mean, r.scale);
    out.push_back(std::move(r));
  }
  return out;
}

ErgmCltResult clt_report_ergm(const ergm::ErgmSpec& spec, const ergm::CutBall& ball, std::uint64_t effective,
                              const ergm::SmallGraph& subgraph, Rng& rng) {
  if (effective < 200) throw Rejected("effective sample target must be at least 200");
  const double sigma2 = ergm::sigma_n_squared(spec, ball.p_star);
  const std::size_t n = spec.n;
  const std::uint64_t sweep = n * (n - 1) / 2;
  ergm::PhaseChain chain(spec, ball, rng);
  const auto run_sweep = [&] {
    for (std::uint64_t t = 0; t < sweep; ++t) chain.step(rng);
  };
  for (int s = 0; s < 200; ++s) run_sweep();

  std::vector<double> pilot;
  for (int s = 0; s < 2000; ++s) {
    run_sweep();
    pilot.push_back(static_cast<double>(chain.state().edge_count()));
  }
  const double tau_pilot = autocorrelation_time(pilot);
  const auto thin = static_cast<std::uint64_t>(std::ceil(2.0 * tau_pilot));

  std::vector<double> all, edges, sub;
  all.reserve(effective * thin);
  for (std::uint64_t i = 0; i < effective; ++i) {
    for (std::uint64_t t = 0; t < thin; ++t) {
      run_sweep();
      all.push_back(static_cast<double>(chain.state().edge_count()));
    }
    edges.push_back(all.back());
    sub.push_back(static_cast<double>(ergm::count_homomorphisms(subgraph, chain.state())));
  }
  const double tau = autocorrelation_time(all);
  const double ess = static_cast<double>(all.size()) / (2.0 * tau);
  if (ess < 200.0)
    throw Rejected("effective sample size " + std::to_string(ess) + " < 200 (tau=" + std::to_string(tau) +
                   " sweeps, thin=" + std::to_string(thin) + ")");

  const auto moments = [](const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, ss / static_cast<double>(v.size() - 1)};
  };

  ErgmCltResult out;
  auto fill = [&](CltReport& r, const std::vector<double>& v, double scale, std::string name, std::string formula) {
    const auto [m, var] = moments(v);
    r.statistic = std::move(name);
    r.exact = false;
    r.size = n;
    r.mean = m;
    r.variance = var;
    r.scale = scale;
    r.scale_formula = std::move(formula);
    r.predicted_variance = scale * scale;
    r.variance_ratio = var / r.predicted_variance;
    r.distance = normal_distance(v, m, scale);
    r.sample_count = v.size();
    r.autocorrelation_time = tau;
    r.thin = thin;
    r.effective_samples = ess;
    r.approximate = chain.approximate();
  };
  const double sigma = std::sqrt(sigma2);
  fill(out.edges, edges, sigma, "edge count", "sigma_n^2 = p*(1-p*)C(n,2)/(1-2p*(1-p*)h''(p*))");
  const double ne = static_cast<double>(subgraph.edges.size());
  const double sub_scale = 2.0 * ne * std::pow(ball.p_star, ne - 1.0) *
                           std::pow(static_cast<double>(n), static_cast<double>(subgraph.vertices) - 2.0) * sigma;
  fill(out.subgraph, sub, sub_scale, "hom count " + subgraph.name, "2|E| p*^(|E|-1) n^(|V|-2) sigma_n");

  const auto [me, ve] = moments(edges);
  const auto [ms, vs] = moments(sub);
  double cxy = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i) cxy += (edges[i] - me) * (sub[i] - ms);
  cxy /= static_cast<double>(edges.size() - 1);
  out.correlation = (ve > 0.0 && vs > 0.0) ? cxy / std::sqrt(ve * vs) : 0.0;
  return out;
}

}  // namespace afkg::stats
