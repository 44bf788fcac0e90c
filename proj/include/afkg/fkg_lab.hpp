#pragma once

// FKG diagnostics: lattice-condition scans, the exact defect over up-set
// pairs, sampled defect lower bounds, the approximate-FKG bound and the
// four-chain coupling experiment.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "afkg/glauber.hpp"
#include "afkg/lattice.hpp"
#include "afkg/rng.hpp"

namespace afkg::fkg {

enum class Mode { kExhaustive, kSampled };

struct LatticeReport {
  /// Minimum of log mu(x ^ y) + log mu(x v y) - log mu(x) - log mu(y) over
  /// checked pairs with x, y in the support (-inf when meet or join leaves it).
  double worst_log_ratio = 0.0;
  std::uint64_t pairs_checked = 0;
  bool exhaustive = false;
  /// Set when the minimum is below -1e-10.
  std::optional<std::pair<SpinConfig, SpinConfig>> witness;
};

/// Exhaustive over all pairs for binary N <= 12; otherwise `samples` pairs
/// stratified by Hamming distance (distance d uniform in 1..N).
LatticeReport check_lattice_condition(const MeasureSpec& mu, Mode mode, std::uint64_t samples = 0,
                                      Rng* rng = nullptr);

/// Dense log-weights by configuration code (-inf outside the support).
std::vector<double> log_weight_table(const MeasureSpec& mu);

struct PairScan {
  double worst_log_ratio = 0.0;
  std::uint64_t pairs_checked = 0;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> witness;
};

/// All unordered binary pairs (x, y) with near[x], near[y] and
/// min(|x \ y|, |y \ x|) <= 1, i.e. meet and join within one flip of {x, y}.
/// on_pair, when set, is called for every visited pair.
PairScan scan_near_pairs(std::span<const double> log_weight, const std::vector<bool>& near, std::size_t dimension,
                         const std::function<void(std::uint64_t, std::uint64_t)>& on_pair = {});

/// near[x] = x or one of its neighbours lies in `inside`.
std::vector<bool> one_flip_neighbourhood(const std::vector<bool>& inside, std::size_t dimension);

enum class DefectMethod { kExactUpset, kSampled };

std::string to_string(DefectMethod m);

struct DefectReport {
  /// max(0, max over the searched pairs of -Cov[f, g]) with |f|, |g| <= 1 increasing.
  double delta = 0.0;
  /// The unclamped maximum; negative when every searched pair was positively correlated.
  double raw_max = 0.0;
  bool clamped = false;
  DefectMethod method = DefectMethod::kExactUpset;
  std::uint64_t sample_count = 0;
  /// Covariances came from an exact law (so a sampled delta is a true lower bound).
  bool covariance_exact = true;
  /// Standard error of the witnessing covariance estimate (0 when exact).
  double standard_error = 0.0;
  std::optional<std::pair<UpSet, UpSet>> witness_upsets;
  std::string witness_description;
};

/// Exact defect of a binary measure with N <= 5 by scanning all pairs of up-sets.
DefectReport exact_defect(const MeasureSpec& mu);
DefectReport exact_defect(const ExactDistribution& law);

/// Increasing +-1 valued test functions.
struct FunctionFamily {
  enum class Kind {
    /// f = 2x_i - 1, g = 2x_j - 1 over every ordered pair i != j (exhaustive; `pairs` ignored).
    kCoordinatePairs,
    /// f = 2 1[sum_{A} w x >= a] - 1, g likewise on a disjoint B, all random.
    kDisjointThresholds,
  };
  Kind kind = Kind::kDisjointThresholds;
  /// Random nonnegative weights instead of unit weights.
  bool weighted = false;
};

/// Defect lower bound from exact covariances of sampled test-function pairs.
DefectReport sampled_defect(const ExactDistribution& law, const FunctionFamily& family, std::uint64_t pairs, Rng& rng);
/// Same with covariances estimated from samples (at least 30 required); the
/// result is the maximum estimate and carries its standard error.
DefectReport sampled_defect(const std::vector<SpinConfig>& samples, const FunctionFamily& family, std::uint64_t pairs,
                            Rng& rng);

struct BoundInputs {
  double alpha = 0.0;
  std::uint64_t T = 1;
  int alphabet_size = 2;
  double mu_lambda_complement = 0.0;
  Distance diameter = 0;
};

/// 300 sqrt(T) (T mu(Lambda^c) + (alpha + 10|A|/T)^T diam); +inf for infinite diameter.
double theorem_bound(const BoundInputs& b);

/// Right-hand sides of the three coupling bounds for given alpha, T, eps.
struct CouplingBounds {
  double base_mixing = 0.0;
  double tilted_mixing = 0.0;
  double domination = 0.0;
};

CouplingBounds coupling_bounds(double alpha, std::uint64_t T, double epsilon, int alphabet_size,
                               double mu_lambda_complement, Distance diameter);

struct Wilson {
  double center = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  [[nodiscard]] double halfwidth() const noexcept { return 0.5 * (upper - lower); }
};

/// 95% Wilson score interval.
Wilson wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

struct CouplingInputs {
  std::uint64_t T = 0;
  std::uint64_t replicas = 0;
  double epsilon = 0.0;
  /// Draws exactly from mu.
  std::function<SpinConfig(Rng&)> stationary_sampler;
  /// mu(Lambda^c), exact when known.
  double mu_lambda_complement = 0.0;
  /// Contraction constant used in the bounds (measured).
  double alpha = 0.0;
  Distance diameter = 0;
  std::size_t max_candidates = 20;
  std::size_t pilot_runs = 20;
};

struct EventSummary {
  std::uint64_t count = 0;
  double frequency = 0.0;
  Wilson interval;
  double bound = 0.0;
  bool within_bound = false;
};

struct ReplicaRecord {
  bool base_disagrees = false;
  bool tilted_disagrees = false;
  bool domination_fails = false;
  bool base_stayed_in_lambda = false;
  bool tilted_stayed_in_lambda = false;
  std::uint64_t in_lambda_steps = 0;
  std::uint64_t in_lambda_order_violations = 0;
};

struct CouplingReport {
  EventSummary base_mixing;
  EventSummary tilted_mixing;
  EventSummary domination;
  double epsilon = 0.0;
  double alpha = 0.0;
  double mu_lambda_complement = 0.0;
  std::uint64_t T = 0;
  SpinConfig z;
  std::size_t z_candidates_tried = 0;
  double z_pilot_escape = 0.0;
  double z_threshold = 0.0;
  std::uint64_t in_lambda_steps = 0;
  std::uint64_t in_lambda_order_violations = 0;
  /// Every analytic right-hand side is below one.
  bool informative = false;
  std::vector<ReplicaRecord> replicas;
};

/// Runs the four-chain monotone coupling for T steps per replica. The tilt uses
/// the guaranteed shift so that the mildness hypothesis holds. The starting
/// point z is the first stationary draw in Lambda whose pilot escape frequency
/// is at most 2 T mu(Lambda^c).
CouplingReport coupling_experiment(const MeasureSpec& mu, const IncreasingFunction& g, const Region& lambda,
                                   const CouplingInputs& in, Rng& rng);

}  // namespace afkg::fkg
