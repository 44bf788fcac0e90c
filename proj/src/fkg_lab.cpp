#include "afkg/fkg_lab.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "afkg/parallel.hpp"

namespace afkg::fkg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kWitnessThreshold = -1e-10;

double pair_ratio(double lx, double ly, double lm, double lj) {
  if (lm == kNegInf || lj == kNegInf) return kNegInf;
  return lm + lj - lx - ly;
}

// A +-1 valued increasing test function on binary configurations given as a
// threshold of a nonnegative score over a coordinate subset.
struct Threshold {
  std::vector<std::size_t> coords;
  std::vector<double> weights;
  double level = 0.0;

  [[nodiscard]] bool operator()(const SpinConfig& x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < coords.size(); ++k) s += weights[k] * x[coords[k]];
    return s >= level;
  }
  [[nodiscard]] bool on_code(std::uint64_t c) const {
    double s = 0.0;
    for (std::size_t k = 0; k < coords.size(); ++k) s += weights[k] * static_cast<double>((c >> coords[k]) & 1ULL);
    return s >= level;
  }
  [[nodiscard]] std::string describe() const {
    std::string out = "1[";
    for (std::size_t k = 0; k < coords.size(); ++k) {
      if (k) out += "+";
      if (weights[k] != 1.0) out += std::to_string(weights[k]) + "*";
      out += "x" + std::to_string(coords[k]);
    }
    return out + " >= " + std::to_string(level) + "]";
  }
};

std::pair<Threshold, Threshold> draw_thresholds(std::size_t n, bool weighted, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  const std::size_t s = 1 + rng.below(n - 1);
  const std::size_t t = 1 + rng.below(n - s);
  auto make = [&](std::size_t from, std::size_t size) {
    Threshold th;
    double total = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      th.coords.push_back(perm[from + k]);
      const double w = weighted ? rng.uniform() : 1.0;
      th.weights.push_back(w);
      total += w;
    }
    std::sort(th.coords.begin(), th.coords.end());
    th.level = weighted ? total * (1.0 - rng.uniform()) : static_cast<double>(1 + rng.below(size));
    return th;
  };
  Threshold a = make(0, s);
  Threshold b = make(s, t);
  return {std::move(a), std::move(b)};
}

void finish(DefectReport& rep) {
  rep.clamped = rep.raw_max < 0.0;
  rep.delta = std::max(0.0, rep.raw_max);
}

}  // namespace

std::string to_string(DefectMethod m) { return m == DefectMethod::kExactUpset ? "EXACT_UPSET" : "SAMPLED"; }

std::vector<double> log_weight_table(const MeasureSpec& mu) {
  const auto states = state_count(mu.dimension, mu.alphabet_size);
  if (!states || *states > (1ULL << 22)) throw Rejected("log-weight table needs |A|^N <= 2^22");
  std::vector<double> lw(*states);
  for (std::uint64_t c = 0; c < *states; ++c) {
    const SpinConfig x = SpinConfig::from_code(c, mu.dimension, mu.alphabet_size);
    lw[c] = mu.support.contains(x) ? mu.log_weight(x) : kNegInf;
  }
  return lw;
}

LatticeReport check_lattice_condition(const MeasureSpec& mu, Mode mode, std::uint64_t samples, Rng* rng) {
  LatticeReport rep;
  rep.worst_log_ratio = std::numeric_limits<double>::infinity();
  const std::size_t n = mu.dimension;
  if (mode == Mode::kExhaustive) {
    const auto states = state_count(n, mu.alphabet_size);
    if (!states || *states > 4096) throw Rejected("exhaustive lattice check needs at most 4096 states (binary N <= 12)");
    rep.exhaustive = true;
    const auto lw = log_weight_table(mu);
    std::uint64_t wx = 0, wy = 0;
    for (std::uint64_t x = 0; x < *states; ++x) {
      if (lw[x] == kNegInf) continue;
      const SpinConfig sx = SpinConfig::from_code(x, n, mu.alphabet_size);
      for (std::uint64_t y = x + 1; y < *states; ++y) {
        if (lw[y] == kNegInf) continue;
        std::uint64_t m, j;
        if (mu.alphabet_size == 2) {
          m = x & y;
          j = x | y;
        } else {
          const SpinConfig sy = SpinConfig::from_code(y, n, mu.alphabet_size);
          m = meet(sx, sy).code();
          j = join(sx, sy).code();
        }
        ++rep.pairs_checked;
        const double r = pair_ratio(lw[x], lw[y], lw[m], lw[j]);
        if (r < rep.worst_log_ratio) {
          rep.worst_log_ratio = r;
          wx = x;
          wy = y;
        }
      }
    }
    if (rep.worst_log_ratio < kWitnessThreshold)
      rep.witness = std::make_pair(SpinConfig::from_code(wx, n, mu.alphabet_size),
                                   SpinConfig::from_code(wy, n, mu.alphabet_size));
  } else {
    if (rng == nullptr || samples == 0) throw Rejected("sampled mode needs an rng and a positive sample count");
    auto lw = [&](const SpinConfig& z) { return mu.support.contains(z) ? mu.log_weight(z) : kNegInf; };
    const auto a = static_cast<std::uint64_t>(mu.alphabet_size);
    for (std::uint64_t s = 0; s < samples; ++s) {
      SpinConfig x(n, mu.alphabet_size);
      for (std::size_t i = 0; i < n; ++i) x.set(i, static_cast<int>(rng->below(a)));
      const double lx = lw(x);
      if (lx == kNegInf) continue;
      const std::size_t d = 1 + rng->below(n);
      SpinConfig y = x;
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      for (std::size_t k = 0; k < d; ++k) {
        std::swap(perm[k], perm[k + rng->below(n - k)]);
        const std::size_t i = perm[k];
        const int shift = 1 + static_cast<int>(rng->below(a - 1));
        y.set(i, (x[i] + shift) % mu.alphabet_size);
      }
      const double ly = lw(y);
      if (ly == kNegInf) continue;
      ++rep.pairs_checked;
      const double r = pair_ratio(lx, ly, lw(meet(x, y)), lw(join(x, y)));
      if (r < rep.worst_log_ratio) {
        rep.worst_log_ratio = r;
        if (r < kWitnessThreshold) rep.witness = std::make_pair(x, y);
      }
    }
  }
  if (rep.pairs_checked == 0) rep.worst_log_ratio = 0.0;
  return rep;
}

std::vector<bool> one_flip_neighbourhood(const std::vector<bool>& inside, std::size_t dimension) {
  std::vector<bool> near(inside.size(), false);
  for (std::uint64_t x = 0; x < inside.size(); ++x) {
    if (inside[x]) {
      near[x] = true;
      continue;
    }
    for (std::size_t i = 0; i < dimension && !near[x]; ++i)
      if (inside[x ^ (1ULL << i)]) near[x] = true;
  }
  return near;
}

PairScan scan_near_pairs(std::span<const double> log_weight, const std::vector<bool>& near, std::size_t dimension,
                         const std::function<void(std::uint64_t, std::uint64_t)>& on_pair) {
  if (dimension > 24 || log_weight.size() != (1ULL << dimension) || near.size() != log_weight.size())
    throw Rejected("pair scan needs dense tables over {0,1}^N with N <= 24");
  const std::uint64_t mask = (1ULL << dimension) - 1;
  PairScan rep;
  rep.worst_log_ratio = std::numeric_limits<double>::infinity();
  for (std::uint64_t x = 0; x <= mask; ++x) {
    if (!near[x]) continue;
    const std::uint64_t zeros = ~x & mask;
    // y = (x minus `removed`) plus a subset of x's zeros, removed = 0 or one set bit of x.
    std::uint64_t removals[65];
    std::size_t count = 0;
    removals[count++] = 0;
    for (std::uint64_t ones = x; ones != 0; ones &= ones - 1) removals[count++] = ones & (~ones + 1);
    for (std::size_t r = 0; r < count; ++r) {
      const std::uint64_t base = x & ~removals[r];
      std::uint64_t add = 0;
      while (true) {
        const std::uint64_t y = base | add;
        // Pairs with |y \ x| <= 1 are reached from both ends; keep one.
        const bool twice = std::popcount(add) <= 1;
        if (near[y] && !(twice && y < x)) {
          ++rep.pairs_checked;
          if (on_pair) on_pair(x, y);
          const double lx = log_weight[x], ly = log_weight[y];
          if (lx != kNegInf && ly != kNegInf) {
            const double ratio = pair_ratio(lx, ly, log_weight[x & y], log_weight[x | y]);
            if (ratio < rep.worst_log_ratio) {
              rep.worst_log_ratio = ratio;
              if (ratio < kWitnessThreshold) rep.witness = std::make_pair(x, y);
            }
          }
        }
        if (add == zeros) break;
        add = (add - zeros) & zeros;
      }
    }
  }
  if (rep.worst_log_ratio == std::numeric_limits<double>::infinity()) rep.worst_log_ratio = 0.0;
  return rep;
}

DefectReport exact_defect(const MeasureSpec& mu) {
  if (mu.alphabet_size != 2) throw Rejected("exact defect needs a binary alphabet");
  if (mu.dimension > 5) throw Rejected("exact defect requires N <= 5; use sampled_defect for larger N");
  return exact_defect(enumerate_measure(mu));
}

DefectReport exact_defect(const ExactDistribution& law) {
  if (law.alphabet_size != 2) throw Rejected("exact defect needs a binary alphabet");
  if (law.dimension > 5) throw Rejected("exact defect requires N <= 5; use sampled_defect for larger N");
  const auto upsets = enumerate_upsets(law.dimension);
  const std::size_t states = law.prob.size();
  // Byte-wise partial sums of probabilities so P(mask) is four lookups.
  const std::size_t bytes = (states + 7) / 8;
  std::vector<std::array<double, 256>> table(bytes);
  for (std::size_t b = 0; b < bytes; ++b)
    for (std::size_t v = 0; v < 256; ++v) {
      double s = 0.0;
      for (std::size_t bit = 0; bit < 8; ++bit)
        if (((v >> bit) & 1U) && 8 * b + bit < states) s += law.prob[8 * b + bit];
      table[b][v] = s;
    }
  auto prob = [&](std::uint64_t members) {
    double s = 0.0;
    for (std::size_t b = 0; b < bytes; ++b) s += table[b][(members >> (8 * b)) & 0xffU];
    return s;
  };
  std::vector<double> p(upsets.size());
  for (std::size_t k = 0; k < upsets.size(); ++k) p[k] = prob(upsets[k].members);

  DefectReport rep;
  rep.method = DefectMethod::kExactUpset;
  rep.raw_max = kNegInf;
  std::size_t wa = 0, wb = 0;
  for (std::size_t a = 0; a < upsets.size(); ++a)
    for (std::size_t b = a; b < upsets.size(); ++b) {
      const double c = prob(upsets[a].members & upsets[b].members) - p[a] * p[b];
      if (-4.0 * c > rep.raw_max) {
        rep.raw_max = -4.0 * c;
        wa = a;
        wb = b;
      }
    }
  rep.sample_count = upsets.size() * (upsets.size() + 1) / 2;
  rep.witness_upsets = std::make_pair(upsets[wa], upsets[wb]);
  rep.witness_description = "up-set masks " + std::to_string(upsets[wa].members) + " and " +
                            std::to_string(upsets[wb].members);
  finish(rep);
  return rep;
}

DefectReport sampled_defect(const ExactDistribution& law, const FunctionFamily& family, std::uint64_t pairs, Rng& rng) {
  if (law.alphabet_size != 2) throw Rejected("sampled defect needs a binary alphabet");
  const std::size_t n = law.dimension;
  if (n < 2) throw Rejected("sampled defect needs N >= 2");
  std::vector<std::uint64_t> support;
  for (std::uint64_t c = 0; c < law.prob.size(); ++c)
    if (law.prob[c] > 0.0) support.push_back(c);

  DefectReport rep;
  rep.method = DefectMethod::kSampled;
  rep.covariance_exact = true;
  rep.raw_max = kNegInf;
  if (family.kind == FunctionFamily::Kind::kCoordinatePairs) {
    std::vector<double> m1(n, 0.0);
    std::vector<double> m2(n * n, 0.0);
    for (std::uint64_t c : support) {
      const double pc = law.prob[c];
      for (std::size_t i = 0; i < n; ++i) {
        if (!((c >> i) & 1ULL)) continue;
        m1[i] += pc;
        for (std::size_t j = i + 1; j < n; ++j)
          if ((c >> j) & 1ULL) m2[i * n + j] += pc;
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        ++rep.sample_count;
        const double v = -4.0 * (m2[i * n + j] - m1[i] * m1[j]);
        if (v > rep.raw_max) {
          rep.raw_max = v;
          rep.witness_description = "coordinates " + std::to_string(i) + " and " + std::to_string(j);
        }
      }
  } else {
    if (pairs == 0) throw Rejected("sampled defect needs a positive number of function pairs");
    for (std::uint64_t s = 0; s < pairs; ++s) {
      const auto [f, g] = draw_thresholds(n, family.weighted, rng);
      double ef = 0.0, eg = 0.0, efg = 0.0;
      for (std::uint64_t c : support) {
        const bool a = f.on_code(c), b = g.on_code(c);
        if (a) ef += law.prob[c];
        if (b) eg += law.prob[c];
        if (a && b) efg += law.prob[c];
      }
      ++rep.sample_count;
      const double v = -4.0 * (efg - ef * eg);
      if (v > rep.raw_max) {
        rep.raw_max = v;
        rep.witness_description = f.describe() + " vs " + g.describe();
      }
    }
  }
  finish(rep);
  return rep;
}

DefectReport sampled_defect(const std::vector<SpinConfig>& samples, const FunctionFamily& family, std::uint64_t pairs,
                            Rng& rng) {
  if (samples.size() < 30) throw Rejected("sampled defect needs at least 30 effective samples");
  const std::size_t n = samples.front().dimension();
  const double m = static_cast<double>(samples.size());
  DefectReport rep;
  rep.method = DefectMethod::kSampled;
  rep.covariance_exact = false;
  rep.raw_max = kNegInf;
  auto evaluate = [&](auto&& f, auto&& g, const std::string& what) {
    std::vector<double> fv(samples.size()), gv(samples.size());
    double ef = 0.0, eg = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      fv[k] = f(samples[k]) ? 1.0 : 0.0;
      gv[k] = g(samples[k]) ? 1.0 : 0.0;
      ef += fv[k];
      eg += gv[k];
    }
    ef /= m;
    eg /= m;
    double c = 0.0, c2 = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const double prod = (fv[k] - ef) * (gv[k] - eg);
      c += prod;
      c2 += prod * prod;
    }
    const double cov = c / (m - 1.0);
    const double var = std::max(0.0, (c2 / m - (c / m) * (c / m)));
    ++rep.sample_count;
    if (-4.0 * cov > rep.raw_max) {
      rep.raw_max = -4.0 * cov;
      rep.standard_error = 4.0 * std::sqrt(var / m);
      rep.witness_description = what;
    }
  };
  if (family.kind == FunctionFamily::Kind::kCoordinatePairs) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        evaluate([i](const SpinConfig& x) { return x[i] == 1; }, [j](const SpinConfig& x) { return x[j] == 1; },
                 "coordinates " + std::to_string(i) + " and " + std::to_string(j));
  } else {
    if (pairs == 0) throw Rejected("sampled defect needs a positive number of function pairs");
    for (std::uint64_t s = 0; s < pairs; ++s) {
      const auto [f, g] = draw_thresholds(n, family.weighted, rng);
      evaluate(f, g, f.describe() + " vs " + g.describe());
    }
  }
  finish(rep);
  return rep;
}

double theorem_bound(const BoundInputs& b) {
  if (b.T < 1) throw Rejected("T must be at least 1");
  if (!(b.mu_lambda_complement >= 0.0 && b.mu_lambda_complement <= 1.0))
    throw Rejected("mu(Lambda^c) must lie in [0,1]");
  if (b.alpha < 0.0) throw Rejected("alpha must be nonnegative");
  if (b.diameter == kInfinite) return std::numeric_limits<double>::infinity();
  const double t = static_cast<double>(b.T);
  double geometric = 0.0;
  if (b.diameter > 0)
    geometric = std::pow(b.alpha + 10.0 * b.alphabet_size / t, t) * static_cast<double>(b.diameter);
  return 300.0 * std::sqrt(t) * (t * b.mu_lambda_complement + geometric);
}

CouplingBounds coupling_bounds(double alpha, std::uint64_t T, double epsilon, int alphabet_size,
                               double mu_lambda_complement, Distance diameter) {
  const double t = static_cast<double>(T);
  const double inf = std::numeric_limits<double>::infinity();
  auto geo = [&](double base) {
    if (diameter == 0) return 0.0;
    if (diameter == kInfinite) return inf;
    return std::pow(base, t) * static_cast<double>(diameter);
  };
  const double escape = t * mu_lambda_complement;
  const double tilt = std::exp(2.0 * epsilon * t);
  CouplingBounds b;
  b.base_mixing = 2.0 * escape + geo(alpha);
  b.tilted_mixing = 2.0 * tilt * escape + geo(alpha + 10.0 * alphabet_size * epsilon);
  b.domination = 2.0 * tilt * escape;
  return b;
}

Wilson wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) throw Rejected("Wilson interval needs at least one trial");
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return Wilson{p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

CouplingReport coupling_experiment(const MeasureSpec& mu, const IncreasingFunction& g, const Region& lambda,
                                   const CouplingInputs& in, Rng& rng) {
  if (in.T < 1 || in.replicas < 1) throw Rejected("T and replicas must be positive");
  if (!in.stationary_sampler) throw Rejected("a stationary sampler for mu is required");
  const TiltSpec tilt = make_tilt(mu, g, in.epsilon, TiltShift::kGuaranteed);
  const double g_top = g.sup_norm_bound + tilt.shift;
  auto sample_tilted = [&](Rng& r) {
    for (int attempt = 0; attempt < 1000000; ++attempt) {
      SpinConfig x = in.stationary_sampler(r);
      if (r.uniform() * g_top < tilt.g_tilde(x)) return x;
    }
    throw Rejected("tilted rejection sampler did not accept");
  };

  CouplingReport rep;
  rep.epsilon = in.epsilon;
  rep.alpha = in.alpha;
  rep.mu_lambda_complement = in.mu_lambda_complement;
  rep.T = in.T;
  rep.z_threshold = 2.0 * static_cast<double>(in.T) * in.mu_lambda_complement;

  // Starting point: a stationary draw in Lambda whose chains rarely leave Lambda before T.
  Rng zr = rng.split(0x7a);
  bool found = false;
  double best_escape = 2.0;
  for (std::size_t c = 0; c < in.max_candidates && !found; ++c) {
    SpinConfig z;
    bool have = false;
    for (int attempt = 0; attempt < 100000 && !have; ++attempt) {
      z = in.stationary_sampler(zr);
      have = lambda.contains(z);
    }
    if (!have) throw Rejected("stationary sampler never produced a state in Lambda");
    ++rep.z_candidates_tried;
    std::uint64_t escapes_base = 0, escapes_tilted = 0;
    for (std::size_t p = 0; p < in.pilot_runs; ++p) {
      SpinConfig xb = z, xt = z;
      bool out_b = false, out_t = false;
      SpinConfig* chains[] = {&xb, &xt};
      const MeasureSpec* measures[] = {&mu, &tilt.tilted};
      for (std::uint64_t t = 1; t < in.T && !(out_b && out_t); ++t) {
        coupled_update(chains, measures, zr);
        out_b = out_b || !lambda.contains(xb);
        out_t = out_t || !lambda.contains(xt);
      }
      escapes_base += out_b;
      escapes_tilted += out_t;
    }
    const double runs = static_cast<double>(std::max<std::size_t>(in.pilot_runs, 1));
    const double escape = std::max(static_cast<double>(escapes_base), static_cast<double>(escapes_tilted)) / runs;
    if (escape < best_escape) best_escape = escape;
    if (escape <= rep.z_threshold) {
      rep.z = z;
      rep.z_pilot_escape = escape;
      found = true;
    }
  }
  if (!found)
    throw Rejected("no admissible starting point: best pilot escape frequency " + std::to_string(best_escape) +
                   " exceeds 2 T mu(Lambda^c) = " + std::to_string(rep.z_threshold) + " after " +
                   std::to_string(rep.z_candidates_tried) + " candidates");

  rep.replicas.resize(in.replicas);
  parallel_for(in.replicas, worker_count(), [&](std::size_t r) {
    Rng rr = rng.split(0x1000 + r);
    CoupledQuadruple q{in.stationary_sampler(rr), sample_tilted(rr), rep.z, rep.z, 0};
    ReplicaRecord rec;
    bool base_in = true, tilt_in = true;
    for (std::uint64_t t = 0; t < in.T; ++t) {
      monotone_coupled_update(q, mu, tilt, rr);
      base_in = base_in && lambda.contains(q.x_from_z);
      tilt_in = tilt_in && lambda.contains(q.x_tilted_from_z);
      if (base_in && tilt_in) {
        ++rec.in_lambda_steps;
        if (!q.x_from_z.leq(q.x_tilted_from_z)) ++rec.in_lambda_order_violations;
      }
    }
    rec.base_disagrees = !(q.x_from_z == q.x_stationary);
    rec.tilted_disagrees = !(q.x_tilted_from_z == q.x_tilted_stationary);
    rec.domination_fails = !q.x_from_z.leq(q.x_tilted_from_z);
    rec.base_stayed_in_lambda = base_in;
    rec.tilted_stayed_in_lambda = tilt_in;
    rep.replicas[r] = rec;
  });

  std::uint64_t e1 = 0, e2 = 0, e3 = 0;
  for (const auto& rec : rep.replicas) {
    e1 += rec.base_disagrees;
    e2 += rec.tilted_disagrees;
    e3 += rec.domination_fails;
    rep.in_lambda_steps += rec.in_lambda_steps;
    rep.in_lambda_order_violations += rec.in_lambda_order_violations;
  }
  const auto bounds = coupling_bounds(in.alpha, in.T, in.epsilon, mu.alphabet_size, in.mu_lambda_complement,
                                      in.diameter);
  auto summarize = [&](std::uint64_t count, double bound) {
    EventSummary s;
    s.count = count;
    s.interval = wilson_interval(count, in.replicas);
    s.frequency = static_cast<double>(count) / static_cast<double>(in.replicas);
    s.bound = bound;
    s.within_bound = s.frequency <= bound + 2.0 * s.interval.halfwidth();
    return s;
  };
  rep.base_mixing = summarize(e1, bounds.base_mixing);
  rep.tilted_mixing = summarize(e2, bounds.tilted_mixing);
  rep.domination = summarize(e3, bounds.domination);
  rep.informative = bounds.base_mixing < 1.0 && bounds.tilted_mixing < 1.0 && bounds.domination < 1.0;
  return rep;
}

}  // namespace afkg::fkg
