#pragma once

// Covariance inequality checks, multilinear and marginal probes, distances to
// the standard normal and CLT reports for both model families.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "afkg/ergm.hpp"
#include "afkg/gcwm.hpp"
#include "afkg/glauber.hpp"
#include "afkg/lattice.hpp"
#include "afkg/rng.hpp"

namespace afkg::stats {

using Function = std::function<double(const SpinConfig&)>;

/// Lip_i(F) for F on {0,1}^N viewed inside [0,1]^N: max over x of
/// |F(x with x_i = 1) - F(x with x_i = 0)|. Exhaustive, N <= 20.
std::vector<double> lipschitz_constants(const Function& f, std::size_t dimension);

struct CovBoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double interval_length = 1.0;
  double delta = 0.0;
  std::vector<double> lip_f;
  std::vector<double> lip_g;
  /// Cov[X_i, X_j], row-major N x N.
  std::vector<double> covariance;
  bool exact = true;
  std::uint64_t sample_count = 0;

  [[nodiscard]] bool holds() const noexcept { return lhs <= rhs; }
  [[nodiscard]] double slack() const noexcept { return rhs - lhs; }
};

/// sum_{i,j} a_i b_j (C_ij + 4 |I|^2 delta).
double covariance_rhs(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& cov,
                      double delta, double interval_length = 1.0);

/// Exact mode: every covariance by enumeration; Lip constants computed
/// exhaustively when not supplied (N <= 12).
CovBoundCheck cov_bound_check(const ExactDistribution& law, const Function& f, const Function& g, double delta,
                              std::optional<std::vector<double>> lip_f = std::nullopt,
                              std::optional<std::vector<double>> lip_g = std::nullopt);
/// Sampled mode: covariances from samples. Lip constants are required.
CovBoundCheck cov_bound_check(const std::vector<SpinConfig>& samples, const Function& f, const Function& g,
                              double delta, const std::optional<std::vector<double>>& lip_f,
                              const std::optional<std::vector<double>>& lip_g);

/// Mean with a batch-means standard error (the series may be autocorrelated).
struct SeriesMean {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t count = 0;
};

SeriesMean batch_means(const std::vector<double>& series, std::size_t batches = 50);

/// Integrated autocorrelation time 1/2 + sum_k rho_k, truncated by Geyer's
/// initial positive sequence. Requires at least 100 points.
double autocorrelation_time(const std::vector<double>& series);

/// Ordinary least squares y = a + b x; returns (b, standard error of b).
std::pair<double, double> ols_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ChiSquare {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  /// Bins after pooling adjacent categories with expected count below 5.
  std::size_t bins = 0;
};

/// Pearson goodness of fit of observed counts against probabilities.
ChiSquare chi_square_test(const std::vector<std::uint64_t>& observed, const std::vector<double>& expected_prob);

/// How the product expectation is estimated.
enum class Symmetrize {
  /// The listed edges only.
  kNone,
  /// Average over every edge tuple in the same vertex-permutation orbit
  /// (k <= 2: single edges, adjacent pairs, disjoint pairs). Valid for
  /// measures invariant under relabelling vertices.
  kOrbit,
};

struct MultilinearPoint {
  std::size_t n = 0;
  /// |E[prod X(e_j)] - E[X(e)]^k|.
  double deviation = 0.0;
  double product_mean = 0.0;
  double edge_mean = 0.0;
  double standard_error = 0.0;
  double edge_standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t samples = 0;
};

/// Accumulates the probe statistics along a chain. Feed it states one by one.
class MultilinearProbe {
 public:
  /// edges: distinct potential edges as vertex pairs, 1 <= k <= 4; `reference` is e.
  MultilinearProbe(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges,
                   std::pair<std::size_t, std::size_t> reference, Symmetrize mode);

  void observe(const ergm::GraphConfig& x);
  [[nodiscard]] MultilinearPoint result() const;

 private:
  std::size_t n_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::pair<std::size_t, std::size_t> reference_;
  Symmetrize mode_;
  bool adjacent_ = false;
  std::vector<double> products_;
  std::vector<double> singles_;
};

struct MarginalPoint {
  std::size_t n = 0;
  double deviation = 0.0;
  double edge_mean = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// sqrt(log n / n).
  double envelope = 0.0;
  std::uint64_t samples = 0;
};

struct MultilinearReport {
  std::vector<MultilinearPoint> points;
  /// |E[X(e)] - p*| at the same grid points (p* = ball centre).
  std::vector<MarginalPoint> marginals;
  double slope = 0.0;
  double slope_standard_error = 0.0;
};

/// Draws `samples` states of the phase chain at each n (one recorded state per
/// `record_every` steps after `burn_in` steps), and fits log deviation against log n.
MultilinearReport multilinear_probe(const ergm::ErgmSpec& spec, const ergm::CutBall& ball,
                                    const std::vector<std::size_t>& n_grid, std::size_t k, bool adjacent,
                                    std::uint64_t samples, std::uint64_t record_every, std::uint64_t burn_in,
                                    std::uint64_t seed);

/// Fits the log-log slope of an existing point series.
void fit_slope(MultilinearReport& report);

/// |E[X(e)] - p*| estimated by the edge density of recorded states (orbit average).
MarginalPoint marginal_point(const std::vector<double>& densities, double p_star, std::size_t n);
MarginalPoint marginal_point(double edge_mean, double standard_error, std::uint64_t samples, double p_star,
                             std::size_t n);

struct NormalDistance {
  double kolmogorov = 0.0;
  double wasserstein = 0.0;
};

/// Exact law given as atoms (value, probability), standardized by (v - center)/scale.
NormalDistance normal_distance(const std::vector<std::pair<double, double>>& atoms, double center, double scale);
/// Samples (at least 100).
NormalDistance normal_distance(std::vector<double> samples, double center, double scale);

struct CltReport {
  std::string statistic;
  bool exact = false;
  std::size_t size = 0;
  double mean = 0.0;
  double variance = 0.0;
  /// sigma used to standardize.
  double scale = 0.0;
  std::string scale_formula;
  /// Predicted variance and the ratio variance / predicted.
  double predicted_variance = 0.0;
  double variance_ratio = 0.0;
  NormalDistance distance;
  std::uint64_t sample_count = 0;
  /// MCMC only.
  double autocorrelation_time = 0.0;
  std::uint64_t thin = 0;
  double effective_samples = 0.0;
  bool approximate = false;
};

/// N m(1-m) / (1 - m(1-m) h''(m)).
double gcwm_mean_field_variance(const std::vector<double>& beta, double m_star, std::size_t n_spins);

/// Exact laws of S = sum x_i under the phase measure at each N, standardized
/// by the exact standard deviation.
std::vector<CltReport> clt_report_gcwm(const std::vector<double>& beta, double m_star, double eta,
                                       const std::vector<std::size_t>& n_grid);

struct ErgmCltResult {
  CltReport edges;
  CltReport subgraph;
  /// Correlation of the standardized edge and subgraph counts.
  double correlation = 0.0;
};

/// MCMC route at one n: burn-in, a pilot run to measure the autocorrelation
/// time of the edge count (in sweeps of C(n,2) steps), then `effective`
/// recorded states thinned by ceil(2 tau). Throws Rejected when the effective
/// sample size of the final series is below 200.
ErgmCltResult clt_report_ergm(const ergm::ErgmSpec& spec, const ergm::CutBall& ball, std::uint64_t effective,
                              const ergm::SmallGraph& subgraph, Rng& rng);

}  // namespace afkg::stats
