#pragma once

// Exponential random graph models H(x) = sum_j beta_j t(G_j, x) with weight
// exp(n^2 H): rate analysis, the good set of r statistics, cut balls around
// constant graphons and the phase-conditioned Glauber sampler.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "afkg/glauber.hpp"
#include "afkg/graph.hpp"
#include "afkg/lattice.hpp"
#include "afkg/rng.hpp"

namespace afkg::ergm {

/// graphs[0] is a single edge; beta[0] is free and beta[j] >= 0 for j >= 1.
struct ErgmSpec {
  std::vector<SmallGraph> graphs;
  std::vector<double> beta;
  std::size_t n = 0;
};

std::vector<std::string> validate_spec(const std::vector<SmallGraph>& graphs, const std::vector<double>& beta,
                                       std::size_t n);
ErgmSpec make_spec(std::vector<SmallGraph> graphs, std::vector<double> beta, std::size_t n);
ErgmSpec edge_only_spec(double beta0, std::size_t n);
ErgmSpec edge_triangle_spec(double beta0, double beta1, std::size_t n);
/// Same model on a different number of vertices.
ErgmSpec with_vertices(const ErgmSpec& spec, std::size_t n);

double hamiltonian(const ErgmSpec& spec, const GraphConfig& x);
/// n^2 (H(x with e) - H(x without e)).
double flip_log_odds(const ErgmSpec& spec, const GraphConfig& x, std::size_t u, std::size_t v);
std::size_t max_pattern_vertices(const ErgmSpec& spec);

/// Coefficients of h(p) = sum_j beta_j p^{|E_j|}: result[k-1] multiplies p^k.
std::vector<double> density_polynomial(const ErgmSpec& spec);

struct ErgmStationary {
  double p = 0.0;
  double rate = 0.0;
  double rate_d1 = 0.0;
  double rate_d2 = 0.0;
  /// p - logistic(2 h'(p)).
  double fixed_point_residual = 0.0;
  /// d/dp logistic(2 h'(p)).
  double map_derivative = 0.0;
};

struct ErgmRateAnalysis {
  std::vector<ErgmStationary> stationary_points;
  std::vector<double> maximizers;
  std::vector<double> strict_maximizers;
  std::vector<double> critical_excluded;
  /// sigma_n^2 for each strict maximizer (same order); NaN when flagged inconsistent.
  std::vector<double> sigma_n_squared;
  std::vector<bool> inconsistent;
  double tolerance = 0.0;
};

/// L(p) = h(p) - (p log p + (1-p) log(1-p)) / 2, maximized by grid scan and bisection.
ErgmRateAnalysis ergm_rate_analysis(const ErgmSpec& spec, double tol = 1e-10, std::size_t grid_size = 10000);

/// p(1-p) C(n,2) / (1 - 2 p(1-p) h''(p)); throws when the denominator is not positive.
double sigma_n_squared(const ErgmSpec& spec, double p_star);

/// The unconditioned measure on the C(n,2) edge indicators.
MeasureSpec ergm_measure(const ErgmSpec& spec);

/// Cut-distance ball around W_{p*}. For n above exact_mode_max_n the ball is
/// replaced by the density band |t(edge) - p*| <= eta/2, optionally intersected
/// with the good set at gamma_epsilon; that proxy is reported as approximate.
struct CutBall {
  double p_star = 0.0;
  double eta = 0.0;
  std::size_t exact_mode_max_n = 12;
  std::optional<double> gamma_epsilon;

  [[nodiscard]] bool exact_for(std::size_t n) const noexcept { return n <= exact_mode_max_n; }
};

/// Balls around distinct maximizers must satisfy |p_a - p_b| > 2 eta.
std::vector<std::string> validate_balls(const ErgmRateAnalysis& analysis, double eta);

struct GoodSet {
  double p_star = 0.0;
  double epsilon = 0.0;
  std::size_t v_max = 0;
  std::vector<SmallGraph> probes;
};

GoodSet make_good_set(std::size_t v_max, double p_star, double epsilon);

struct GammaReport {
  double worst_deviation = 0.0;
  std::size_t probe = 0;
  std::size_t u = 0;
  std::size_t v = 0;
  bool member = false;
};

/// max over probes and all potential edges of |r_G(x,e) - p*|.
GammaReport gamma_membership(const GraphConfig& x, const GoodSet& gamma);
/// Early-exit membership test.
bool in_gamma(const GraphConfig& x, const GoodSet& gamma);
Region gamma_region(std::size_t n, const GoodSet& gamma);

/// Membership of the ball (or its proxy); `value` is the cut norm or density deviation.
bool in_ball(const ErgmSpec& spec, const CutBall& ball, const GraphConfig& x);
Region ball_region(const ErgmSpec& spec, const CutBall& ball);
MeasureSpec ball_measure(const ErgmSpec& spec, const CutBall& ball);

/// Glauber dynamics of the ball-conditioned ERGM. Moves that would leave the
/// ball are rejected and the chain stays put.
class PhaseChain {
 public:
  /// Warm start from Erdos-Renyi(n, p*); up to 100 attempts to land in the ball.
  PhaseChain(ErgmSpec spec, CutBall ball, Rng& rng);

  /// One heat-bath step; returns the edge index that was resampled.
  std::size_t step(Rng& rng);

  [[nodiscard]] const GraphConfig& state() const noexcept { return x_; }
  [[nodiscard]] std::uint64_t steps() const noexcept { return steps_; }
  [[nodiscard]] std::uint64_t rejections() const noexcept { return rejections_; }
  [[nodiscard]] bool last_rejected() const noexcept { return last_rejected_; }
  [[nodiscard]] bool last_changed() const noexcept { return last_changed_; }
  [[nodiscard]] bool approximate() const noexcept { return !ball_.exact_for(spec_.n); }
  [[nodiscard]] const ErgmSpec& spec() const noexcept { return spec_; }

 private:
  bool accept_current();

  ErgmSpec spec_;
  CutBall ball_;
  GoodSet gamma_;
  GraphConfig x_;
  std::optional<CutNormTracker> tracker_;
  std::vector<std::pair<std::size_t, std::size_t>> endpoints_;
  std::uint64_t steps_ = 0;
  std::uint64_t rejections_ = 0;
  bool last_rejected_ = false;
  bool last_changed_ = false;
};

struct StepRecord {
  std::uint64_t step = 0;
  std::size_t edge = 0;
  bool changed = false;
  bool rejected = false;
};

struct SamplerResult {
  GraphConfig final_state;
  std::uint64_t steps = 0;
  std::uint64_t rejections = 0;
  bool approximate = false;
};

/// Runs the conditioned chain for `steps` steps. Requires p* to be a strict
/// maximizer. The observer sees every step and the state after it.
SamplerResult phase_sampler(const ErgmSpec& spec, const CutBall& ball, std::uint64_t steps, Rng& rng,
                            const std::function<void(const StepRecord&, const GraphConfig&)>& observer = {});

struct ErgmLocalFkgReport {
  double worst_log_ratio = 0.0;
  std::uint64_t pairs_checked = 0;
  std::uint64_t superadditivity_checks = 0;
  std::uint64_t superadditivity_violations = 0;
  /// Pairs where some N_G was strictly superadditive.
  std::uint64_t strict_pairs = 0;
  double inner_radius = 0.0;
  std::optional<std::pair<GraphConfig, GraphConfig>> witness;
};

enum class Mode { kExhaustive, kSampled };

/// Local lattice condition of the ball-conditioned ERGM over pairs x, y within
/// one flip of the inner ball (radius min(eta/2, eta - 4/n^2)) whose meet and
/// join are within one flip of {x, y}. Exhaustive mode requires n <= 6; sampled
/// mode draws x from the phase chain and y among its admissible neighbours.
ErgmLocalFkgReport local_fkg_witness_ergm(const ErgmSpec& spec, const CutBall& ball, Mode mode,
                                          std::uint64_t samples = 0, Rng* rng = nullptr);

/// Radius of the inner ball used by the local witness.
double inner_radius(const CutBall& ball, std::size_t n);

}  // namespace afkg::ergm
