#include <doctest.h>

#include <cmath>

#include "afkg/fkg_lab.hpp"
#include "afkg/gcwm.hpp"

using namespace afkg;
using namespace afkg::fkg;

namespace {

// Oracle values from tests/oracle/oracle.py (exact defects at N = 5).
constexpr double kDefectLevels23 = 0.934683400005801;
constexpr double kDefectPhaseLevels45 = 0.09347899077637489;

MeasureSpec levels_measure(std::vector<double> beta, std::size_t n, std::size_t lo, std::size_t hi) {
  const auto p = gcwm::make_params(std::move(beta), n);
  return restrict_measure(gcwm::full_measure(p), gcwm::level_region(n, lo, hi, "levels"), "levels");
}

}  // namespace

TEST_CASE("a ferromagnetic Curie-Weiss measure satisfies the lattice condition") {
  const auto mu = gcwm::full_measure(gcwm::make_params({-3.0, 3.0}, 8));
  const auto rep = check_lattice_condition(mu, Mode::kExhaustive);
  CHECK(rep.exhaustive);
  CHECK(rep.pairs_checked > 0);
  CHECK(rep.worst_log_ratio >= -1e-10);
  CHECK_FALSE(rep.witness);
}

TEST_CASE("a two-level band breaks the lattice condition") {
  const auto mu = levels_measure({0.0, 3.0}, 6, 2, 3);
  const auto rep = check_lattice_condition(mu, Mode::kExhaustive);
  CHECK(std::isinf(rep.worst_log_ratio));
  CHECK(rep.witness);
  Rng r(3);
  const auto s = check_lattice_condition(mu, Mode::kSampled, 5000, &r);
  CHECK_FALSE(s.exhaustive);
  CHECK(s.worst_log_ratio < 0.0);
}

TEST_CASE("exact defect matches the up-set oracle") {
  CHECK(exact_defect(levels_measure({0.0, 3.0}, 5, 2, 3)).delta == doctest::Approx(kDefectLevels23).epsilon(1e-10));
  CHECK(exact_defect(levels_measure({-3.0, 3.0}, 5, 4, 5)).delta ==
        doctest::Approx(kDefectPhaseLevels45).epsilon(1e-10));
  const auto full = exact_defect(gcwm::full_measure(gcwm::make_params({-3.0, 3.0}, 5)));
  CHECK(full.delta == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(full.method == DefectMethod::kExactUpset);
  CHECK_THROWS_AS(exact_defect(gcwm::full_measure(gcwm::make_params({0.0}, 6))), Rejected);
}

TEST_CASE("sampled defect is a lower bound on the exact defect") {
  const auto mu = levels_measure({0.0, 3.0}, 5, 2, 3);
  const auto law = enumerate_measure(mu);
  const double exact = exact_defect(law).delta;
  Rng r(8);
  for (bool weighted : {false, true}) {
    const auto d = sampled_defect(law, FunctionFamily{FunctionFamily::Kind::kDisjointThresholds, weighted}, 2000, r);
    CHECK(d.covariance_exact);
    CHECK(d.delta <= exact + 1e-12);
    CHECK(d.delta > 0.0);
  }
  const auto c = sampled_defect(law, FunctionFamily{FunctionFamily::Kind::kCoordinatePairs, false}, 0, r);
  CHECK(c.delta <= exact + 1e-12);
  CHECK(c.delta > 0.0);
}

TEST_CASE("sampled defect from draws needs enough samples") {
  Rng r(1);
  std::vector<SpinConfig> few(10, SpinConfig(5));
  CHECK_THROWS_AS(sampled_defect(few, FunctionFamily{}, 10, r), Rejected);
}

TEST_CASE("near-pair scan and neighbourhoods") {
  std::vector<bool> inside(8, false);
  inside[0] = true;
  const auto near = one_flip_neighbourhood(inside, 3);
  CHECK(near[0]);
  CHECK(near[1]);
  CHECK(near[2]);
  CHECK(near[4]);
  CHECK_FALSE(near[3]);
  const std::vector<double> flat(8, 0.0);
  std::uint64_t visits = 0;
  const auto scan = scan_near_pairs(flat, near, 3, [&](std::uint64_t, std::uint64_t) { ++visits; });
  CHECK(scan.pairs_checked == visits);
  CHECK(scan.worst_log_ratio == doctest::Approx(0.0));
}

TEST_CASE("approximate-FKG bound arithmetic") {
  BoundInputs b{0.5, 4, 2, 0.01, 3};
  const double expect = 300.0 * 2.0 * (4 * 0.01 + std::pow(0.5 + 10.0 * 2 / 4.0, 4) * 3);
  CHECK(theorem_bound(b) == doctest::Approx(expect));
  b.diameter = kInfinite;
  CHECK(std::isinf(theorem_bound(b)));
  const auto cb = coupling_bounds(0.1, 1000, 0.001, 2, 0.0, 10);
  CHECK(cb.base_mixing >= 0.0);
  CHECK(cb.tilted_mixing >= cb.base_mixing);
  CHECK(cb.domination >= 0.0);
}

TEST_CASE("Wilson interval") {
  const auto w = wilson_interval(0, 100);
  CHECK(w.lower == doctest::Approx(0.0));
  CHECK(w.upper == doctest::Approx(0.037).epsilon(0.02));
  const auto h = wilson_interval(50, 100);
  CHECK(h.center == doctest::Approx(0.5));
  CHECK(h.halfwidth() == doctest::Approx(0.0962).epsilon(0.01));
  CHECK_THROWS_AS(wilson_interval(3, 0), Rejected);
}

TEST_CASE("coupling experiment keeps order inside Lambda") {
  const auto a = gcwm::find_maximizers({-3.0, 3.0});
  const std::size_t n = 30;
  const auto p = gcwm::make_params({-3.0, 3.0}, n);
  const auto band = gcwm::default_band(a, a.maximizers[1]);
  const auto mu = gcwm::phase_measure(p, band);
  const auto law = gcwm::exact_magnetization_law(p, band);
  const auto lambda = gcwm::inner_region(p, band);
  const auto [lo, hi] = gcwm::band_levels(n, band.m_star, band.epsilon);
  double outside = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    if (k < lo || k > hi) outside += law.probability(k);
  CouplingInputs in;
  in.T = 900;
  in.replicas = 300;
  in.epsilon = 1.0 / 900.0;
  in.stationary_sampler = [law](Rng& r) { return law.sample(r); };
  in.mu_lambda_complement = outside;
  in.alpha = 0.99;
  in.diameter = gcwm::level_band_diameter(n, lo, hi);
  IncreasingFunction g{[](const SpinConfig& x) { return mean_value(x); }, true, {}, 1.0, "m"};
  Rng r(17);
  const auto rep = coupling_experiment(mu, g, lambda, in, r);
  CHECK(rep.replicas.size() == 300);
  CHECK(rep.in_lambda_steps > 0);
  CHECK(rep.in_lambda_order_violations == 0);
  CHECK(rep.base_mixing.frequency == doctest::Approx(static_cast<double>(rep.base_mixing.count) / 300.0));
  CHECK(lambda.contains(rep.z));
}
