#include <doctest.h>

#include <cmath>

#include "afkg/gcwm.hpp"
#include "afkg/glauber.hpp"

using namespace afkg;
using namespace afkg::gcwm;

namespace {

// Oracle values from tests/oracle/oracle.py.
constexpr double kMStarMinus3Plus3 = 0.9292798183200551;
constexpr double kMapDerivMinus3Plus3 = 0.39431302549860275;
constexpr double kMStarZero12 = 0.8956211896309507;

double brute_log_weight(const Params& p, const SpinConfig& x) {
  const double m = mean_value(x);
  double h = 0.0;
  for (std::size_t j = 1; j <= p.beta.size(); ++j) h += p.beta[j - 1] * std::pow(m, static_cast<double>(j));
  return static_cast<double>(p.n_spins) * h;
}

}  // namespace

TEST_CASE("validation names the offending coefficient") {
  const auto d = validate_params({0.3, -1.0, 2.0}, 10);
  REQUIRE(d.size() == 1);
  CHECK(d[0] == "ferromagnetic violation j=2");
  CHECK(validate_params({-5.0, 0.0, 1.0}, 10).empty());
  CHECK_THROWS_AS(make_params({1.0, -0.1}, 5), Rejected);
  CHECK_THROWS_AS(make_params({}, 5), Rejected);
}

TEST_CASE("polynomial and hamiltonian") {
  const std::vector<double> beta{1.0, -0.0, 2.0};
  CHECK(poly(beta, 0.5) == doctest::Approx(0.5 + 2.0 * 0.125));
  CHECK(poly_d1(beta, 0.5) == doctest::Approx(1.0 + 6.0 * 0.25));
  CHECK(poly_d2(beta, 0.5) == doctest::Approx(12.0 * 0.5));
  const auto p = make_params(beta, 8);
  const auto x = SpinConfig::from_code(0b1111, 8);
  CHECK(hamiltonian(p, x) * 8.0 == doctest::Approx(brute_log_weight(p, x)));
}

TEST_CASE("rate function values and endpoint derivatives") {
  const auto r = rate_function({0.0}, 0.5);
  CHECK(r.value == doctest::Approx(std::log(2.0)));
  CHECK(r.d1 == doctest::Approx(0.0));
  CHECK(r.d2 == doctest::Approx(-4.0));
  CHECK(rate_function({0.0}, 0.0).value == 0.0);
  CHECK(std::isinf(rate_function({0.0}, 0.0).d1));
  CHECK_THROWS_AS(rate_function({0.0}, 1.5), Rejected);
}

TEST_CASE("maximizers: trivial, symmetric double well, asymmetric single well") {
  const auto flat = find_maximizers({0.0, 0.0});
  REQUIRE(flat.maximizers.size() == 1);
  CHECK(flat.maximizers[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(flat.strict_maximizers.size() == 1);

  const auto dw = find_maximizers({-3.0, 3.0});
  REQUIRE(dw.maximizers.size() == 2);
  CHECK(dw.maximizers[1] == doctest::Approx(kMStarMinus3Plus3).epsilon(1e-9));
  CHECK(dw.maximizers[0] == doctest::Approx(1.0 - kMStarMinus3Plus3).epsilon(1e-9));
  CHECK(dw.strict_maximizers.size() == 2);
  CHECK(mean_field_map_derivative({-3.0, 3.0}, dw.maximizers[1]) == doctest::Approx(kMapDerivMinus3Plus3).epsilon(1e-7));
  CHECK(predicted_kappa({-3.0, 3.0}, dw.maximizers[1]) == doctest::Approx(1.0 - kMapDerivMinus3Plus3).epsilon(1e-7));

  const auto single = find_maximizers({0.0, 1.2});
  REQUIRE(single.maximizers.size() == 1);
  CHECK(single.maximizers[0] == doctest::Approx(kMStarZero12).epsilon(1e-9));
}

TEST_CASE("the Curie point is a critical maximizer, excluded from U") {
  // h = -2m + 2m^2: L''(1/2) = h'' - 4 = 0.
  const auto a = find_maximizers({-2.0, 2.0});
  REQUIRE(a.maximizers.size() == 1);
  CHECK(a.maximizers[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(a.strict_maximizers.empty());
  CHECK(a.critical_excluded.size() == 1);
}

TEST_CASE("maximizer search rejects sloppy settings") {
  CHECK_THROWS_AS(find_maximizers({0.0}, 100), Rejected);
  CHECK_THROWS_AS(find_maximizers({0.0}, 10000, 1e-3), Rejected);
}

TEST_CASE("stationary points are fixed points of the mean-field map") {
  for (const auto& beta : std::vector<std::vector<double>>{{-3.0, 3.0}, {0.0, 1.2}, {-1.0, 0.0, 3.0}, {0.4}}) {
    const auto a = find_maximizers(beta);
    for (const auto& s : a.stationary_points) {
      CHECK(std::abs(s.rate_d1) < 1e-8);
      CHECK(std::abs(s.fixed_point_residual) < 1e-8);
      const auto lemma = check_lemma_equiv(beta, s.m, 1e-8);
      CHECK(lemma.agree());
    }
  }
}

TEST_CASE("stationary and fixed-point classifications agree for random ferromagnetic parameters") {
  Rng r(2024);
  int points = 0;
  for (int t = 0; t < 40; ++t) {
    // |h'| < 30 keeps every stationary point representable in double precision.
    std::vector<double> beta{-4.0 + 6.0 * r.uniform()};
    const auto k = 1 + r.below(3);
    for (std::uint64_t j = 0; j < k; ++j) beta.push_back(3.0 * r.uniform());
    for (const auto& s : find_maximizers(beta).stationary_points) {
      // Within 1e-6 of an endpoint L' is too ill-conditioned for an absolute 1e-8 test.
      if (std::min(s.m, 1.0 - s.m) < 1e-6) continue;
      ++points;
      CHECK(check_lemma_equiv(beta, s.m, 1e-8).agree());
    }
  }
  CHECK(points >= 40);
}

TEST_CASE("band levels are closed") {
  // |k/10 - 0.5| <= 0.2 gives k in [3, 7] including the endpoints.
  const auto [lo, hi] = band_levels(10, 0.5, 0.2);
  CHECK(lo == 3);
  CHECK(hi == 7);
  const auto [elo, ehi] = band_levels(10, 0.55, 0.01);
  CHECK(elo > ehi);
  CHECK_THROWS_AS(make_band(0.5, 0.1, 0.2), Rejected);
}

TEST_CASE("band validation names both maximizers") {
  const auto a = find_maximizers({-3.0, 3.0});
  const auto d = validate_bands(a, 0.45, 0.1);
  REQUIRE(d.size() == 1);
  CHECK(d[0].find("0.07072") != std::string::npos);
  CHECK(d[0].find("0.9292798") != std::string::npos);
  CHECK(validate_bands(a, 0.1, 0.05).empty());
  const auto b = default_band(a, a.maximizers[1]);
  CHECK(b.eta == doctest::Approx(0.1));
  CHECK(b.epsilon == doctest::Approx(0.05));
}

TEST_CASE("exact level law and moments match brute force") {
  Rng r(77);
  for (std::size_t n = 2; n <= 12; ++n) {
    std::vector<double> beta{-4.0 + 6.0 * r.uniform(), 5.0 * r.uniform(), 2.0 * r.uniform()};
    const auto p = make_params(beta, n);
    for (bool banded : {false, true}) {
      std::optional<PhaseBand> band;
      if (banded) band = make_band(0.6, 0.25, 0.1);
      const auto law = exact_magnetization_law(p, band);
      std::vector<double> w(n + 1, 0.0);
      double z = 0.0, ex1 = 0.0, ex1x2 = 0.0, es = 0.0, es2 = 0.0;
      for (std::uint64_t c = 0; c < (1ULL << n); ++c) {
        const auto x = SpinConfig::from_code(c, n);
        const auto k = x.count_ones();
        if (band && std::abs(static_cast<double>(k) / n - 0.6) > 0.25 + 1e-12) continue;
        const double wt = std::exp(brute_log_weight(p, x));
        z += wt;
        w[k] += wt;
        ex1 += wt * x[0];
        ex1x2 += wt * x[0] * x[1];
        es += wt * k;
        es2 += wt * static_cast<double>(k * k);
      }
      for (std::size_t k = 0; k <= n; ++k) CHECK(law.probability(k) == doctest::Approx(w[k] / z).epsilon(1e-12));
      const auto mom = exchangeable_moments(law);
      CHECK(mom.mean_x1 == doctest::Approx(ex1 / z).epsilon(1e-12));
      CHECK(mom.cov_x1_x2 == doctest::Approx(ex1x2 / z - (ex1 / z) * (ex1 / z)).epsilon(1e-10));
      CHECK(mom.var_sum == doctest::Approx(es2 / z - (es / z) * (es / z)).epsilon(1e-10));
    }
  }
}

TEST_CASE("empty band is rejected") {
  const auto p = make_params({0.0}, 10);
  CHECK_THROWS_AS(exact_magnetization_law(p, make_band(0.55, 0.01, 0.005)), Rejected);
}

TEST_CASE("level law sampling matches the law") {
  const auto p = make_params({-3.0, 3.0}, 20);
  const auto law = exact_magnetization_law(p);
  Rng r(8);
  std::vector<double> counts(21, 0.0);
  const int draws = 200000;
  for (int t = 0; t < draws; ++t) counts[law.sample(r).count_ones()] += 1.0;
  for (std::size_t k = 0; k <= 20; ++k) {
    const double pk = law.probability(k);
    CHECK(std::abs(counts[k] / draws - pk) < 5.0 * std::sqrt(pk * (1 - pk) / draws) + 1e-9);
  }
}

TEST_CASE("discrete partials: exact differences and leading-order approximation") {
  const auto p = make_params({-1.0, 2.0, 1.5}, 40);
  Rng r(4);
  for (int t = 0; t < 50; ++t) {
    auto x = SpinConfig::from_code(r() & ((1ULL << 40) - 1), 40);
    const auto i = r.below(40);
    auto up = x, down = x;
    up.set(i, 1);
    down.set(i, 0);
    const auto d = discrete_partial(p, x, i);
    CHECK(d.exact * 40.0 == doctest::Approx(brute_log_weight(p, up) - brute_log_weight(p, down)).epsilon(1e-10));
    CHECK(std::abs(d.gap()) < 5.0 / (40.0 * 40.0));
    auto j = r.below(40);
    if (j == i) j = (i + 1) % 40;
    const auto d2 = discrete_partial2(p, x, i, j);
    CHECK(std::abs(d2.gap()) < 20.0 / (40.0 * 40.0 * 40.0));
  }
  CHECK_THROWS_AS(discrete_partial2(p, SpinConfig(40), 3, 3), Rejected);
}

TEST_CASE("level-band diameter agrees with BFS") {
  for (std::size_t n = 2; n <= 8; ++n)
    for (std::size_t lo = 0; lo <= n; ++lo)
      for (std::size_t hi = lo; hi <= n; ++hi) {
        const auto region = level_region(n, lo, hi, "levels").enumerated();
        CHECK(level_band_diameter(n, lo, hi) == intrinsic_diameter(region));
      }
}

TEST_CASE("inner pair sampler stays in the inner band") {
  const auto p = make_params({-3.0, 3.0}, 60);
  const auto band = make_band(kMStarMinus3Plus3, 0.1, 0.05);
  const auto inner = inner_region(p, band);
  auto sampler = inner_pair_sampler(p, band);
  Rng r(6);
  for (int t = 0; t < 2000; ++t) {
    const auto [a, b] = sampler(r);
    REQUIRE(hamming(a, b) == 1);
    REQUIRE(inner.contains(a));
    REQUIRE(inner.contains(b));
  }
}

TEST_CASE("mass outside bands shrinks with N") {
  const auto a = find_maximizers({-3.0, 3.0});
  double prev = 1.0;
  for (std::size_t n : {50, 100, 200}) {
    const auto law = exact_magnetization_law(make_params({-3.0, 3.0}, n));
    const double m = mass_outside_bands(law, a.maximizers, 0.1);
    CHECK(m < prev);
    prev = m;
  }
}

TEST_CASE("local FKG witness is non-negative on exhaustive instances") {
  for (const auto& beta : std::vector<std::vector<double>>{{-3.0, 3.0}, {0.0, 1.2}}) {
    const auto a = find_maximizers(beta);
    for (std::size_t n : {10, 12}) {
      // Two flips below the inner band must stay inside the outer band at these N.
      const auto band = make_band(a.maximizers.back(), 0.3, 0.05);
      const auto rep = local_fkg_witness(make_params(beta, n), band, Mode::kExhaustive);
      CHECK(rep.pairs_checked > 0);
      CHECK(rep.worst_log_ratio >= -1e-10);
      CHECK(rep.superadditivity_violations == 0);
    }
  }
}

TEST_CASE("stationary points far beyond double precision are rejected, not missed") {
  // h'(m) = -1 + 40m: the upper fixed point has logit near 39, so 1 - m < 1e-16.
  CHECK_THROWS_AS(find_maximizers({-1.0, 20.0}), Rejected);
  // Logit near 25 is still representable and is found.
  const auto a = find_maximizers({-1.0, 13.0});
  CHECK(a.maximizers.back() > 1.0 - 1e-10);
}
