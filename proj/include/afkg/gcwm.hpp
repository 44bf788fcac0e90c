#pragma once

// Generalized Curie-Weiss models on {0,1}^N with Hamiltonian h(m(x)),
// h(m) = sum_j beta_j m^j and measure nu(x) ∝ exp(N h(m(x))).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "afkg/glauber.hpp"
#include "afkg/lattice.hpp"
#include "afkg/rng.hpp"

namespace afkg::gcwm {

/// beta[j-1] is the coefficient of m^j. Ferromagnetic: beta_j >= 0 for j >= 2.
struct Params {
  std::vector<double> beta;
  std::size_t n_spins = 0;
};

/// Validates and returns the parameters; throws Rejected naming the first
/// offending index ("ferromagnetic violation j=2").
Params make_params(std::vector<double> beta, std::size_t n_spins);
/// Diagnostics instead of exceptions; empty when valid.
std::vector<std::string> validate_params(const std::vector<double>& beta, std::size_t n_spins);

double poly(const std::vector<double>& beta, double m);
double poly_d1(const std::vector<double>& beta, double m);
double poly_d2(const std::vector<double>& beta, double m);

double hamiltonian(const Params& p, const SpinConfig& x);

struct RateValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// L(m) = h(m) - m log m - (1-m) log(1-m) with its first two derivatives.
/// 0 log 0 = 0 at the endpoints, where the derivatives are reported as +-inf.
RateValue rate_function(const std::vector<double>& beta, double m);

/// The mean-field map m -> logistic(h'(m)) and its derivative.
double mean_field_map(const std::vector<double>& beta, double m);
double mean_field_map_derivative(const std::vector<double>& beta, double m);

struct StationaryPoint {
  double m = 0.0;
  double rate = 0.0;
  double rate_d1 = 0.0;
  double rate_d2 = 0.0;
  /// m - logistic(h'(m)).
  double fixed_point_residual = 0.0;
  /// d/dm logistic(h'(m)).
  double map_derivative = 0.0;
};

struct RateAnalysis {
  std::vector<StationaryPoint> stationary_points;
  /// Global maximizers (M).
  std::vector<double> maximizers;
  /// Global maximizers with L'' < -tol (U).
  std::vector<double> strict_maximizers;
  /// Global maximizers with |L''| <= tol: critical, excluded from U.
  std::vector<double> critical_excluded;
  double tolerance = 0.0;
};

/// Grid scan of L' followed by bisection on every sign change.
RateAnalysis find_maximizers(const std::vector<double>& beta, std::size_t grid_size = 10000, double tol = 1e-10);

struct LemmaCheck {
  bool concave_stationary = false;
  bool attracting_fixed_point = false;
  [[nodiscard]] bool agree() const noexcept { return concave_stationary == attracting_fixed_point; }
};

/// Evaluates (L'(m) = 0 and L''(m) < 0) and (m = logistic(h'(m)) and the map's
/// derivative < 1), each to tolerance.
LemmaCheck check_lemma_equiv(const std::vector<double>& beta, double m, double tol);

/// Magnetization band |m - m_star| <= eta with an inner band of half-width epsilon.
struct PhaseBand {
  double m_star = 0.0;
  double eta = 0.0;
  double epsilon = 0.0;
};

PhaseBand make_band(double m_star, double eta, double epsilon);
/// eta = min(0.1, half the smallest gap between maximizers), epsilon = eta / 2.
PhaseBand default_band(const RateAnalysis& analysis, double m_star);
/// Bands around distinct maximizers must be disjoint and epsilon < eta.
std::vector<std::string> validate_bands(const RateAnalysis& analysis, double eta, double epsilon);

/// Magnetization levels k with |k/N - center| <= half_width (closed band).
std::pair<std::size_t, std::size_t> band_levels(std::size_t n_spins, double center, double half_width);

/// Exact law of m(X) over the levels k/N, k = 0..N, as normalized log-probabilities.
struct MagnetizationLaw {
  std::size_t n_spins = 0;
  std::vector<double> log_probabilities;
  std::optional<PhaseBand> conditioning_band;

  [[nodiscard]] double probability(std::size_t k) const;
  [[nodiscard]] double mean_level() const;
  [[nodiscard]] double variance_level() const;
  /// Level drawn from the law, then a uniformly random configuration with that many ones.
  [[nodiscard]] SpinConfig sample(Rng& rng) const;
};

/// Exact level law; with a band, the law under the phase measure. Throws when
/// the band contains no level. N <= 10^6.
MagnetizationLaw exact_magnetization_law(const Params& p, const std::optional<PhaseBand>& band = std::nullopt);
/// Same law restricted to the level range [lo, hi] and renormalized.
MagnetizationLaw restrict_levels(const MagnetizationLaw& law, std::size_t lo, std::size_t hi);

struct ExchangeableMoments {
  double mean_x1 = 0.0;
  double cov_x1_x2 = 0.0;
  double var_sum = 0.0;
};

ExchangeableMoments exchangeable_moments(const MagnetizationLaw& law);

/// Probability that m(X) is farther than eta from every listed maximizer.
double mass_outside_bands(const MagnetizationLaw& law, const std::vector<double>& centers, double eta);

struct PartialReport {
  double exact = 0.0;
  double leading_order = 0.0;
  [[nodiscard]] double gap() const noexcept { return exact - leading_order; }
};

/// Discrete derivative H(x^{+i}) - H(x^{-i}) and its first-order approximation
/// sum_j beta_j j m(x^{-i})^{j-1} / N.
PartialReport discrete_partial(const Params& p, const SpinConfig& x, std::size_t i);
/// Mixed second difference and its approximation sum_j beta_j j(j-1) m(x^{-i-j})^{j-2} / N^2.
PartialReport discrete_partial2(const Params& p, const SpinConfig& x, std::size_t i, std::size_t j);

/// Full measure nu (support = whole cube) with the closed-form site update.
MeasureSpec full_measure(const Params& p);
/// nu conditioned on the outer band |m - m_star| <= eta.
MeasureSpec phase_measure(const Params& p, const PhaseBand& band);
/// The inner band |m - m_star| <= epsilon, with its certified intrinsic diameter.
Region inner_region(const Params& p, const PhaseBand& band);
/// Region for an arbitrary closed level range [lo, hi].
Region level_region(std::size_t n_spins, std::size_t lo, std::size_t hi, std::string label);

/// Intrinsic diameter of a level band: max Hamming distance over the band when
/// it spans at least two levels (paths alternate additions and removals), 0 for
/// a single point, infinite for a single level with several members.
Distance level_band_diameter(std::size_t n_spins, std::size_t lo, std::size_t hi);

/// Adjacent pairs inside the inner band, drawn exactly from the phase measure
/// restricted to the inner band.
PairSampler inner_pair_sampler(const Params& p, const PhaseBand& band);

/// The mean-field contraction constant 1 - d/dm logistic(h'(m)) at m_star.
double predicted_kappa(const std::vector<double>& beta, double m_star);

struct LocalFkgReport {
  double worst_log_ratio = 0.0;
  std::uint64_t pairs_checked = 0;
  /// Pairs where m(x v y)^k + m(x ^ y)^k < m(x)^k + m(y)^k for some monomial k.
  std::uint64_t superadditivity_violations = 0;
  std::optional<std::pair<SpinConfig, SpinConfig>> witness;
};

enum class Mode { kExhaustive, kSampled };

/// Minimum of log mu(x v y) + log mu(x ^ y) - log mu(x) - log mu(y) over pairs
/// with d(x, inner) <= 1, d(y, inner) <= 1 and meet/join within one flip of {x, y},
/// mu the phase measure. Exhaustive mode requires N <= 12.
LocalFkgReport local_fkg_witness(const Params& p, const PhaseBand& band, Mode mode, std::uint64_t samples = 0,
                                 Rng* rng = nullptr);

}  // namespace afkg::gcwm
