#include <doctest.h>

#include <cmath>

#include "afkg/gcwm.hpp"
#include "afkg/glauber.hpp"

using namespace afkg;

namespace {

// Exact one-step heat-bath kernel applied to a law: (pi P)(y).
std::vector<double> one_step(const MeasureSpec& mu, const std::vector<double>& pi) {
  const std::size_t n = mu.dimension;
  std::vector<double> out(pi.size(), 0.0);
  for (std::uint64_t c = 0; c < pi.size(); ++c) {
    if (pi[c] == 0.0) continue;
    const auto x = SpinConfig::from_code(c, n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto q = conditional_update_distribution(mu, x, i);
      for (int s = 0; s < 2; ++s) {
        auto y = x;
        y.set(i, s);
        out[y.code()] += pi[c] * q[s] / static_cast<double>(n);
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("logistic is stable at extremes") {
  CHECK(logistic(0.0) == doctest::Approx(0.5));
  CHECK(logistic(800.0) == 1.0);
  CHECK(logistic(-800.0) >= 0.0);
  CHECK(logistic(-800.0) < 1e-300);
  CHECK(logistic(2.0) + logistic(-2.0) == doctest::Approx(1.0));
}

TEST_CASE("inverse cdf picks the smallest admissible symbol") {
  const std::vector<double> p{0.2, 0.5, 0.3};
  CHECK(inverse_cdf(p, 0.0) == 0);
  CHECK(inverse_cdf(p, 0.19) == 0);
  CHECK(inverse_cdf(p, 0.2) == 1);
  CHECK(inverse_cdf(p, 0.69) == 1);
  CHECK(inverse_cdf(p, 0.7) == 2);
  CHECK(inverse_cdf(p, 0.999999) == 2);
}

TEST_CASE("product measure conditionals are the marginals") {
  const auto mu = product_measure({{0.0, 1.0}, {0.0, -2.0}, {0.0, 0.5}});
  const auto x = SpinConfig::from_code(0b101, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto q = conditional_update_distribution(mu, x, i);
    CHECK(q[0] + q[1] == doctest::Approx(1.0));
  }
  CHECK(conditional_update_distribution(mu, x, 0)[1] == doctest::Approx(logistic(1.0)));
  CHECK(conditional_update_distribution(mu, x, 1)[1] == doctest::Approx(logistic(-2.0)));
}

TEST_CASE("the heat-bath kernel leaves the measure invariant (exact)") {
  const auto p = gcwm::make_params({-1.0, 2.0, 0.5}, 6);
  for (const auto& mu : {gcwm::full_measure(p), gcwm::phase_measure(p, gcwm::make_band(0.5, 0.34, 0.17))}) {
    const auto law = enumerate_measure(mu);
    const auto next = one_step(mu, law.prob);
    for (std::size_t c = 0; c < next.size(); ++c) CHECK(next[c] == doctest::Approx(law.prob[c]).epsilon(1e-12));
  }
}

TEST_CASE("fast-path and generic conditionals agree") {
  const auto p = gcwm::make_params({-3.0, 3.0}, 9);
  auto mu = gcwm::full_measure(p);
  auto slow = mu;
  slow.site_log_weights = nullptr;
  Rng r(11);
  for (int t = 0; t < 200; ++t) {
    const auto x = SpinConfig::from_code(r.below(1 << 9), 9);
    const auto i = r.below(9);
    CHECK(conditional_update_distribution(mu, x, i)[1] ==
          doctest::Approx(conditional_update_distribution(slow, x, i)[1]).epsilon(1e-12));
  }
}

TEST_CASE("monotone coupling preserves order for a ferromagnetic measure") {
  const auto p = gcwm::make_params({-3.0, 3.0}, 20);
  const auto mu = gcwm::full_measure(p);
  Rng r(7);
  SpinConfig lo(20), hi = SpinConfig::from_code((1ULL << 20) - 1, 20);
  for (int t = 0; t < 20000; ++t) {
    SpinConfig* chains[] = {&lo, &hi};
    const MeasureSpec* ms[] = {&mu, &mu};
    coupled_update(chains, ms, r);
    REQUIRE(lo.leq(hi));
  }
}

TEST_CASE("guaranteed tilt is mild: e^-eps <= g~/E[g~] <= e^eps") {
  const auto p = gcwm::make_params({-3.0, 3.0}, 8);
  const auto mu = gcwm::full_measure(p);
  const auto law = enumerate_measure(mu);
  IncreasingFunction g{[](const SpinConfig& x) { return x[0] * 1.0; }, true, {}, 1.0, "x0"};
  for (double eps : {0.05, 0.25, 0.5}) {
    const auto tilt = make_tilt(mu, g, eps, TiltShift::kGuaranteed);
    const double mean = law.expectation([&](const SpinConfig& x) { return tilt.g_tilde(x); });
    for (std::uint64_t c = 0; c < law.size(); ++c) {
      const double ratio = tilt.g_tilde(law.config(c)) / mean;
      CHECK(std::log(ratio) <= eps + 1e-12);
      CHECK(std::log(ratio) >= -eps - 1e-12);
    }
    // Tilted law equals base * g~ / E[g~].
    const auto tl = enumerate_measure(tilt.tilted);
    for (std::uint64_t c = 0; c < law.size(); c += 17)
      CHECK(tl.prob[c] == doctest::Approx(law.prob[c] * tilt.g_tilde(law.config(c)) / mean).epsilon(1e-10));
  }
  const auto loose = make_tilt(mu, g, 0.25, TiltShift::kInverseSqrt);
  CHECK(loose.shift == doctest::Approx(4.0));
  CHECK(loose.guaranteed_log_ratio() == doctest::Approx(std::log(5.0 / 3.0)));
}

TEST_CASE("four-chain coupling keeps x^z <= x~^z from a common start") {
  const auto p = gcwm::make_params({-3.0, 3.0}, 16);
  const auto mu = gcwm::full_measure(p);
  IncreasingFunction g{[](const SpinConfig& x) { return mean_value(x); }, true, {}, 1.0, "m"};
  const auto tilt = make_tilt(mu, g, 0.1, TiltShift::kGuaranteed);
  Rng r(3);
  const auto z = SpinConfig::from_code(0x0ff0, 16);
  CoupledQuadruple q{SpinConfig(16), SpinConfig(16), z, z, 0};
  for (int t = 0; t < 5000; ++t) {
    monotone_coupled_update(q, mu, tilt, r);
    REQUIRE(q.x_from_z.leq(q.x_tilted_from_z));
  }
}

TEST_CASE("exact distribution sums to one and respects the support") {
  const auto p = gcwm::make_params({0.0, 3.0}, 7);
  const auto mu = gcwm::phase_measure(p, gcwm::make_band(0.5, 0.15, 0.05));
  const auto law = enumerate_measure(mu);
  double total = 0.0;
  for (std::uint64_t c = 0; c < law.size(); ++c) {
    total += law.prob[c];
    const int k = __builtin_popcountll(c);
    if (k < 3 || k > 4) CHECK(law.prob[c] == 0.0);
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(law.mass_outside(mu.support) == doctest::Approx(0.0));
}

TEST_CASE("contraction estimate rejects bad pair samplers") {
  const auto p = gcwm::make_params({0.5}, 6);
  const auto mu = gcwm::full_measure(p);
  Rng r(1);
  PairSampler same = [](Rng&) { return std::pair{SpinConfig(6), SpinConfig(6)}; };
  CHECK_THROWS_AS(estimate_contraction(mu, Region::full(6), same, 100, r, 6.0), Rejected);
  CHECK_THROWS_AS(estimate_contraction(mu, Region::full(6), same, 10, r, 6.0), Rejected);
}

TEST_CASE("product measure contracts at rate 1 - 1/N") {
  // Independent spins: the differing site is resampled with prob 1/N and then agrees.
  const auto mu = product_measure(std::vector<std::vector<double>>(10, {0.0, 0.3}));
  Rng r(9);
  PairSampler pairs = [](Rng& g) {
    auto a = SpinConfig::from_code(g.below(1 << 10), 10);
    auto b = a;
    b.flip(g.below(10));
    return std::pair{a, b};
  };
  const auto est = estimate_contraction(mu, Region::full(10), pairs, 200000, r, 10.0);
  CHECK(est.alpha_hat == doctest::Approx(0.9).epsilon(0.01));
  CHECK(est.kappa_hat == doctest::Approx(1.0).epsilon(0.05));
}
