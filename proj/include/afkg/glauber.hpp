#pragma once

// Single-site Glauber dynamics over a Gibbs measure, the inverse-CDF monotone
// coupling of several chains, tilted measures and one-step contraction
// estimates.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "afkg/lattice.hpp"
#include "afkg/rng.hpp"

namespace afkg {

/// Logistic function e^s / (1 + e^s), evaluated without overflow.
double logistic(double s) noexcept;

/// A Gibbs measure mu(x) ∝ exp(log_weight(x)) restricted to `support`.
struct MeasureSpec {
  std::size_t dimension = 0;
  int alphabet_size = 2;
  std::function<double(const SpinConfig&)> log_weight;
  /// Optional fast path. Writes log_weight(x with coordinate i set to s) into
  /// out[s] for every symbol s, up to a common additive constant.
  std::function<void(const SpinConfig&, std::size_t, std::span<double>)> site_log_weights;
  Region support;
  std::string label;
};

/// Product of independent coordinates with the given per-coordinate log-weights
/// (field[i][s] = log-weight of symbol s at coordinate i).
MeasureSpec product_measure(std::vector<std::vector<double>> field, std::string label = "product");

/// Same measure restricted to a different support.
MeasureSpec restrict_measure(const MeasureSpec& mu, Region support, std::string label);

/// Conditional law of coordinate i given the rest, restricted to symbols that
/// keep the state inside the support. Entries sum to one.
std::vector<double> conditional_update_distribution(const MeasureSpec& mu, const SpinConfig& x, std::size_t i);
void conditional_update_distribution(const MeasureSpec& mu, const SpinConfig& x, std::size_t i,
                                     std::span<double> out);

/// Smallest symbol s with u < P(0) + ... + P(s); the last symbol when rounding leaves a gap.
int inverse_cdf(std::span<const double> probabilities, double u) noexcept;

/// One heat-bath step in place. Returns the coordinate that was resampled.
std::size_t glauber_update(const MeasureSpec& mu, SpinConfig& x, Rng& rng);
SpinConfig glauber_step(const MeasureSpec& mu, const SpinConfig& x, Rng& rng);

/// One monotone-coupled step for any number of chains: a single coordinate and
/// a single uniform U drive every chain through its own inverse conditional CDF.
/// chains[k] evolves under measures[k]. Returns the coordinate.
std::size_t coupled_update(std::span<SpinConfig* const> chains, std::span<const MeasureSpec* const> measures, Rng& rng);

/// How the tilt shift is chosen.
enum class TiltShift {
  /// g + (2/sqrt(eps)) * |g|_inf.
  kInverseSqrt,
  /// g + coth(eps/2) * |g|_inf, the smallest constant shift for which
  /// e^-eps <= g~/E[g~] <= e^eps holds for every base measure.
  kGuaranteed,
};

/// Base measure reweighted by the positive increasing function g~ = g + shift.
struct TiltSpec {
  MeasureSpec base;
  IncreasingFunction g;
  double epsilon = 0.0;
  double shift = 0.0;
  TiltShift rule = TiltShift::kInverseSqrt;
  MeasureSpec tilted;

  [[nodiscard]] double g_tilde(const SpinConfig& x) const { return g(x) + shift; }
  /// Largest |log(g~(x)/E[g~])| that the shift guarantees for any base measure.
  [[nodiscard]] double guaranteed_log_ratio() const;
};

TiltSpec make_tilt(const MeasureSpec& mu, const IncreasingFunction& g, double epsilon,
                   TiltShift rule = TiltShift::kInverseSqrt);

/// The four chains of the monotone coupling: stationary base, stationary tilted,
/// base from z, tilted from z.
struct CoupledQuadruple {
  SpinConfig x_stationary;
  SpinConfig x_tilted_stationary;
  SpinConfig x_from_z;
  SpinConfig x_tilted_from_z;
  std::uint64_t t = 0;
};

CoupledQuadruple monotone_coupled_step(const CoupledQuadruple& q, const MeasureSpec& mu, const TiltSpec& tilt,
                                       Rng& rng);
/// In-place variant; returns the updated coordinate.
std::size_t monotone_coupled_update(CoupledQuadruple& q, const MeasureSpec& mu, const TiltSpec& tilt, Rng& rng);

struct ContractionEstimate {
  double alpha_hat = 0.0;
  double confidence_halfwidth = 0.0;
  std::uint64_t sample_count = 0;
  double kappa_hat = 0.0;
  /// The factor multiplying 1 - alpha_hat in kappa_hat (N or n^2).
  double kappa_scale = 1.0;

  /// kappa at the lower end of the 95% interval.
  [[nodiscard]] double kappa_lower() const { return kappa_scale * (1.0 - alpha_hat - confidence_halfwidth); }
};

using PairSampler = std::function<std::pair<SpinConfig, SpinConfig>(Rng&)>;

/// Mean coupled one-step Hamming distance from adjacent starts drawn by the
/// pair sampler. Every drawn pair is checked against the region and adjacency.
ContractionEstimate estimate_contraction(const MeasureSpec& mu, const Region& region, const PairSampler& pairs,
                                         std::uint64_t reps, Rng& rng, double kappa_scale);

/// Exact law of a measure by enumeration. Dense over configuration codes;
/// log_prob is -inf outside the support. Requires |A|^N <= 2^22.
struct ExactDistribution {
  std::size_t dimension = 0;
  int alphabet_size = 2;
  std::vector<double> log_prob;
  std::vector<double> prob;

  [[nodiscard]] std::size_t size() const noexcept { return prob.size(); }
  [[nodiscard]] SpinConfig config(std::uint64_t code) const {
    return SpinConfig::from_code(code, dimension, alphabet_size);
  }
  [[nodiscard]] double expectation(const std::function<double(const SpinConfig&)>& f) const;
  [[nodiscard]] double covariance(const std::function<double(const SpinConfig&)>& f,
                                  const std::function<double(const SpinConfig&)>& g) const;
  /// Probability of the complement of a region.
  [[nodiscard]] double mass_outside(const Region& region) const;
  /// Draws one configuration code by inversion.
  [[nodiscard]] std::uint64_t sample_code(Rng& rng) const;
};

ExactDistribution enumerate_measure(const MeasureSpec& mu);

}  // namespace afkg
