#include "afkg/glauber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace afkg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) noexcept {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  [[nodiscard]] double value() const noexcept { return sum + c; }
};

constexpr int kMaxAlphabetOnStack = 16;

}  // namespace

double logistic(double s) noexcept {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

MeasureSpec product_measure(std::vector<std::vector<double>> field, std::string label) {
  if (field.empty() || field.front().size() < 2) throw Rejected("product measure needs N >= 1 and |A| >= 2");
  const auto alphabet = static_cast<int>(field.front().size());
  for (const auto& row : field)
    if (static_cast<int>(row.size()) != alphabet) throw Rejected("ragged product-measure field");
  MeasureSpec mu;
  mu.dimension = field.size();
  mu.alphabet_size = alphabet;
  auto shared = std::make_shared<const std::vector<std::vector<double>>>(std::move(field));
  mu.log_weight = [shared](const SpinConfig& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.dimension(); ++i) s += (*shared)[i][static_cast<std::size_t>(x[i])];
    return s;
  };
  mu.site_log_weights = [shared](const SpinConfig&, std::size_t i, std::span<double> out) {
    std::copy((*shared)[i].begin(), (*shared)[i].end(), out.begin());
  };
  mu.support = Region::full(mu.dimension, alphabet);
  mu.label = std::move(label);
  return mu;
}

MeasureSpec restrict_measure(const MeasureSpec& mu, Region support, std::string label) {
  if (support.dimension() != mu.dimension || support.alphabet_size() != mu.alphabet_size)
    throw Rejected("support does not match the measure's state space");
  MeasureSpec out = mu;
  out.support = std::move(support);
  out.label = std::move(label);
  return out;
}

void conditional_update_distribution(const MeasureSpec& mu, const SpinConfig& x, std::size_t i,
                                     std::span<double> out) {
  const auto alphabet = static_cast<std::size_t>(mu.alphabet_size);
  if (out.size() != alphabet) throw Rejected("output span must have one entry per symbol");
  if (i >= mu.dimension) throw Rejected("coordinate out of range");

  const bool full = mu.support.is_full();
  if (mu.site_log_weights && full) {
    mu.site_log_weights(x, i, out);
  } else {
    SpinConfig y = x;
    if (mu.site_log_weights) mu.site_log_weights(x, i, out);
    for (std::size_t s = 0; s < alphabet; ++s) {
      y.set(i, static_cast<int>(s));
      if (!full && !mu.support.contains(y)) {
        out[s] = kNegInf;
        continue;
      }
      if (!mu.site_log_weights) out[s] = mu.log_weight(y);
    }
  }

  double top = kNegInf;
  for (double v : out) top = std::max(top, v);
  if (top == kNegInf) throw Rejected("isolated state: every substitution leaves the support");
  double total = 0.0;
  for (double& v : out) {
    v = (v == kNegInf) ? 0.0 : std::exp(v - top);
    total += v;
  }
  for (double& v : out) v /= total;
}

std::vector<double> conditional_update_distribution(const MeasureSpec& mu, const SpinConfig& x, std::size_t i) {
  std::vector<double> out(static_cast<std::size_t>(mu.alphabet_size));
  conditional_update_distribution(mu, x, i, out);
  return out;
}

int inverse_cdf(std::span<const double> probabilities, double u) noexcept {
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t s = 0; s < probabilities.size(); ++s) {
    if (probabilities[s] <= 0.0) continue;
    cumulative += probabilities[s];
    last_positive = static_cast<int>(s);
    if (u < cumulative) return static_cast<int>(s);
  }
  return last_positive;
}

std::size_t glauber_update(const MeasureSpec& mu, SpinConfig& x, Rng& rng) {
  const std::size_t i = rng.below(mu.dimension);
  const double u = rng.uniform();
  double buf[kMaxAlphabetOnStack];
  std::vector<double> heap;
  std::span<double> probs;
  if (mu.alphabet_size <= kMaxAlphabetOnStack) {
    probs = std::span<double>(buf, static_cast<std::size_t>(mu.alphabet_size));
  } else {
    heap.resize(static_cast<std::size_t>(mu.alphabet_size));
    probs = heap;
  }
  conditional_update_distribution(mu, x, i, probs);
  x.set(i, inverse_cdf(probs, u));
  return i;
}

SpinConfig glauber_step(const MeasureSpec& mu, const SpinConfig& x, Rng& rng) {
  SpinConfig y = x;
  glauber_update(mu, y, rng);
  return y;
}

std::size_t coupled_update(std::span<SpinConfig* const> chains, std::span<const MeasureSpec* const> measures,
                           Rng& rng) {
  if (chains.size() != measures.size() || chains.empty()) throw Rejected("one measure per chain required");
  const std::size_t dimension = measures.front()->dimension;
  const std::size_t i = rng.below(dimension);
  const double u = rng.uniform();
  std::vector<double> probs;
  for (std::size_t k = 0; k < chains.size(); ++k) {
    probs.resize(static_cast<std::size_t>(measures[k]->alphabet_size));
    conditional_update_distribution(*measures[k], *chains[k], i, probs);
    chains[k]->set(i, inverse_cdf(probs, u));
  }
  return i;
}

// ------------------------------------------------------------------ tilt

double TiltSpec::guaranteed_log_ratio() const {
  const double c = shift / g.sup_norm_bound;
  return std::log((c + 1.0) / (c - 1.0));
}

TiltSpec make_tilt(const MeasureSpec& mu, const IncreasingFunction& g, double epsilon, TiltShift rule) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Rejected("tilt epsilon must lie in (0, 1)");
  if (!(g.sup_norm_bound > 0.0)) throw Rejected("tilt function is identically zero; use the base measure");
  TiltSpec t;
  t.base = mu;
  t.g = g;
  t.epsilon = epsilon;
  t.rule = rule;
  t.shift = (rule == TiltShift::kInverseSqrt ? 2.0 / std::sqrt(epsilon) : 1.0 / std::tanh(epsilon / 2.0)) *
            g.sup_norm_bound;

  const double shift = t.shift;
  auto gf = g.evaluator;
  t.tilted = mu;
  t.tilted.label = mu.label + " tilted";
  t.tilted.log_weight = [base = mu.log_weight, gf, shift](const SpinConfig& x) {
    return base(x) + std::log(gf(x) + shift);
  };
  t.tilted.site_log_weights = [base = mu, gf, shift](const SpinConfig& x, std::size_t i, std::span<double> out) {
    SpinConfig y = x;
    for (std::size_t s = 0; s < out.size(); ++s) {
      y.set(i, static_cast<int>(s));
      const double lw = base.site_log_weights ? 0.0 : base.log_weight(y);
      out[s] = lw + std::log(gf(y) + shift);
    }
    if (base.site_log_weights) {
      double buf[kMaxAlphabetOnStack];
      std::vector<double> heap;
      std::span<double> b;
      if (out.size() <= kMaxAlphabetOnStack) {
        b = std::span<double>(buf, out.size());
      } else {
        heap.resize(out.size());
        b = heap;
      }
      base.site_log_weights(x, i, b);
      for (std::size_t s = 0; s < out.size(); ++s) out[s] += b[s];
    }
  };
  return t;
}

std::size_t monotone_coupled_update(CoupledQuadruple& q, const MeasureSpec& mu, const TiltSpec& tilt, Rng& rng) {
  SpinConfig* chains[4] = {&q.x_stationary, &q.x_tilted_stationary, &q.x_from_z, &q.x_tilted_from_z};
  const MeasureSpec* measures[4] = {&mu, &tilt.tilted, &mu, &tilt.tilted};
  const std::size_t i = coupled_update(chains, measures, rng);
  ++q.t;
  return i;
}

CoupledQuadruple monotone_coupled_step(const CoupledQuadruple& q, const MeasureSpec& mu, const TiltSpec& tilt,
                                       Rng& rng) {
  CoupledQuadruple next = q;
  monotone_coupled_update(next, mu, tilt, rng);
  return next;
}

// ----------------------------------------------------------- contraction

ContractionEstimate estimate_contraction(const MeasureSpec& mu, const Region& region, const PairSampler& pairs,
                                         std::uint64_t reps, Rng& rng, double kappa_scale) {
  if (reps < 100) throw Rejected("contraction estimate needs at least 100 repetitions");
  double mean = 0.0;
  double m2 = 0.0;
  const MeasureSpec* measures[2] = {&mu, &mu};
  for (std::uint64_t r = 0; r < reps; ++r) {
    auto [a, b] = pairs(rng);
    if (hamming(a, b) != 1) throw Rejected("pair sampler must return configurations at Hamming distance 1");
    if (!region.contains(a) || !region.contains(b)) throw Rejected("pair sampler left the contraction region");
    SpinConfig* chains[2] = {&a, &b};
    coupled_update(chains, measures, rng);
    const double d = static_cast<double>(hamming(a, b));
    const double delta = d - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (d - mean);
  }
  ContractionEstimate est;
  est.alpha_hat = mean;
  const double sd = std::sqrt(m2 / static_cast<double>(reps - 1));
  est.confidence_halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(reps));
  est.sample_count = reps;
  est.kappa_scale = kappa_scale;
  est.kappa_hat = kappa_scale * (1.0 - mean);
  return est;
}

// ----------------------------------------------------------- exact law

ExactDistribution enumerate_measure(const MeasureSpec& mu) {
  const auto count = state_count(mu.dimension, mu.alphabet_size);
  if (!count || *count > (1ULL << 22)) throw Rejected("exact enumeration needs |A|^N <= 2^22");
  ExactDistribution d;
  d.dimension = mu.dimension;
  d.alphabet_size = mu.alphabet_size;
  d.log_prob.assign(*count, kNegInf);
  double top = kNegInf;
  for (std::uint64_t c = 0; c < *count; ++c) {
    if (!mu.support.contains_code(c)) continue;
    const double lw = mu.log_weight(SpinConfig::from_code(c, mu.dimension, mu.alphabet_size));
    if (!std::isfinite(lw)) throw Rejected("log-weight must be finite on the support");
    d.log_prob[c] = lw;
    top = std::max(top, lw);
  }
  if (top == kNegInf) throw Rejected("measure has empty support");
  CompensatedSum z;
  for (double lw : d.log_prob)
    if (lw != kNegInf) z.add(std::exp(lw - top));
  const double log_z = top + std::log(z.value());
  d.prob.assign(*count, 0.0);
  for (std::uint64_t c = 0; c < *count; ++c) {
    if (d.log_prob[c] == kNegInf) continue;
    d.log_prob[c] -= log_z;
    d.prob[c] = std::exp(d.log_prob[c]);
  }
  return d;
}

double ExactDistribution::expectation(const std::function<double(const SpinConfig&)>& f) const {
  CompensatedSum s;
  for (std::uint64_t c = 0; c < prob.size(); ++c)
    if (prob[c] > 0.0) s.add(prob[c] * f(config(c)));
  return s.value();
}

double ExactDistribution::covariance(const std::function<double(const SpinConfig&)>& f,
                                     const std::function<double(const SpinConfig&)>& g) const {
  std::vector<double> fv(prob.size(), 0.0), gv(prob.size(), 0.0);
  CompensatedSum ef, eg;
  for (std::uint64_t c = 0; c < prob.size(); ++c) {
    if (prob[c] <= 0.0) continue;
    const SpinConfig x = config(c);
    fv[c] = f(x);
    gv[c] = g(x);
    ef.add(prob[c] * fv[c]);
    eg.add(prob[c] * gv[c]);
  }
  const double mf = ef.value();
  const double mg = eg.value();
  CompensatedSum cov;
  for (std::uint64_t c = 0; c < prob.size(); ++c)
    if (prob[c] > 0.0) cov.add(prob[c] * (fv[c] - mf) * (gv[c] - mg));
  return cov.value();
}

double ExactDistribution::mass_outside(const Region& region) const {
  CompensatedSum s;
  for (std::uint64_t c = 0; c < prob.size(); ++c)
    if (prob[c] > 0.0 && !region.contains_code(c)) s.add(prob[c]);
  return s.value();
}

std::uint64_t ExactDistribution::sample_code(Rng& rng) const {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::uint64_t last = 0;
  for (std::uint64_t c = 0; c < prob.size(); ++c) {
    if (prob[c] <= 0.0) continue;
    cumulative += prob[c];
    last = c;
    if (u < cumulative) return c;
  }
  return last;
}

}  // namespace afkg
