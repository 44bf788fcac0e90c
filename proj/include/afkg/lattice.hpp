#pragma once

// Configurations over ordered finite alphabets, lattice operations, regions
// with intrinsic (path-constrained) distances, increasing functions and
// up-set enumeration.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace afkg {

class Rng;

/// Raised when an operation's precondition is violated by its inputs.
class Rejected : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shortest-path lengths and diameters; `kInfinite` marks a disconnected region.
using Distance = std::uint64_t;
inline constexpr Distance kInfinite = std::numeric_limits<Distance>::max();

/// A point of A^N. Binary configurations are bit-packed (coordinate i is bit
/// i % 64 of word i / 64); larger alphabets use one byte per coordinate.
class SpinConfig {
 public:
  SpinConfig() = default;
  explicit SpinConfig(std::size_t dimension, int alphabet_size = 2);

  static SpinConfig from_values(std::span<const int> values, int alphabet_size = 2);
  /// Mixed-radix decoding: coordinate i is digit i of `code` in base |A|.
  static SpinConfig from_code(std::uint64_t code, std::size_t dimension, int alphabet_size = 2);

  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] int alphabet_size() const noexcept { return alphabet_; }
  [[nodiscard]] bool binary() const noexcept { return alphabet_ == 2; }

  [[nodiscard]] int operator[](std::size_t i) const noexcept {
    if (alphabet_ == 2) return static_cast<int>((words_[i >> 6] >> (i & 63)) & 1ULL);
    return bytes_[i];
  }
  void set(std::size_t i, int value);
  /// Binary only.
  void flip(std::size_t i) noexcept { words_[i >> 6] ^= (1ULL << (i & 63)); }

  /// Number of coordinates equal to the top symbol (binary: number of ones).
  [[nodiscard]] std::size_t count_ones() const noexcept;
  /// Sum of all coordinate values.
  [[nodiscard]] std::uint64_t total() const noexcept;
  /// Mixed-radix code (inverse of from_code). Requires |A|^N < 2^64.
  [[nodiscard]] std::uint64_t code() const;

  [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }
  [[nodiscard]] std::vector<int> values() const;

  /// Coordinate-wise order x <= y.
  [[nodiscard]] bool leq(const SpinConfig& other) const;

  friend bool operator==(const SpinConfig& a, const SpinConfig& b) noexcept {
    return a.dimension_ == b.dimension_ && a.alphabet_ == b.alphabet_ && a.words_ == b.words_ &&
           a.bytes_ == b.bytes_;
  }

  friend SpinConfig meet(const SpinConfig& x, const SpinConfig& y);
  friend SpinConfig join(const SpinConfig& x, const SpinConfig& y);
  friend std::size_t hamming(const SpinConfig& x, const SpinConfig& y);

 private:
  std::size_t dimension_ = 0;
  int alphabet_ = 2;
  std::vector<std::uint64_t> words_;
  std::vector<std::uint8_t> bytes_;
};

SpinConfig meet(const SpinConfig& x, const SpinConfig& y);
SpinConfig join(const SpinConfig& x, const SpinConfig& y);
std::size_t hamming(const SpinConfig& x, const SpinConfig& y);

/// Mean coordinate value scaled to [0, 1] (the magnetization for binary spins).
double mean_value(const SpinConfig& x);

/// Number of configurations |A|^N, or nullopt when it does not fit below 2^62.
std::optional<std::uint64_t> state_count(std::size_t dimension, int alphabet_size);

/// A subset of A^N given by a pure membership predicate, optionally backed by
/// an explicit membership table indexed by configuration code.
class Region {
 public:
  using Predicate = std::function<bool(const SpinConfig&)>;

  Region() = default;
  Region(std::size_t dimension, int alphabet_size, Predicate contains, std::string label);

  static Region full(std::size_t dimension, int alphabet_size = 2);
  /// Explicit enumeration; the predicate becomes a table lookup.
  static Region from_codes(std::size_t dimension, int alphabet_size, std::span<const std::uint64_t> codes,
                           std::string label);
  /// Evaluate the predicate on every configuration and store the table.
  /// Requires |A|^N <= 2^26.
  [[nodiscard]] Region enumerated() const;

  [[nodiscard]] bool contains(const SpinConfig& x) const;
  [[nodiscard]] bool contains_code(std::uint64_t code) const;

  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] int alphabet_size() const noexcept { return alphabet_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }
  [[nodiscard]] bool has_table() const noexcept { return table_ != nullptr; }
  [[nodiscard]] bool is_full() const noexcept { return full_; }
  /// Codes of all members, ascending. Requires a table.
  [[nodiscard]] std::vector<std::uint64_t> member_codes() const;

  /// Diameter supplied by a model module that proved it analytically.
  [[nodiscard]] std::optional<Distance> certified_diameter() const noexcept { return certified_diameter_; }
  Region& with_certified_diameter(Distance d) {
    certified_diameter_ = d;
    return *this;
  }

 private:
  std::size_t dimension_ = 0;
  int alphabet_ = 2;
  Predicate predicate_;
  std::shared_ptr<const std::vector<bool>> table_;
  std::optional<Distance> certified_diameter_;
  std::string label_;
  bool full_ = false;
};

/// Shortest path from a to b using Hamming-1 steps that stay inside the region.
Distance intrinsic_distance(const Region& region, const SpinConfig& a, const SpinConfig& b);

/// Maximum intrinsic distance over pairs of region members.
Distance intrinsic_diameter(const Region& region);

/// A real function on A^N together with what is known about it.
struct IncreasingFunction {
  std::function<double(const SpinConfig&)> evaluator;
  bool declared_monotone = true;
  std::optional<std::vector<double>> lip_constants;
  double sup_norm_bound = 0.0;
  std::string label;

  double operator()(const SpinConfig& x) const { return evaluator(x); }
};

/// Exhaustive monotonicity check over all covering pairs (x, x + e_i).
/// Returns false on the first violation. Requires |A|^N <= 2^22.
bool check_monotone_exhaustive(const IncreasingFunction& f, std::size_t dimension, int alphabet_size);

/// Randomized monotonicity spot check along random covering pairs.
bool check_monotone_sampled(const IncreasingFunction& f, std::size_t dimension, int alphabet_size,
                            std::size_t trials, Rng& rng);

/// Largest |f| over all configurations (exhaustive).
double exact_sup_norm(const std::function<double(const SpinConfig&)>& f, std::size_t dimension, int alphabet_size);

/// Upward-closed subset of {0,1}^N, N <= 6, as a bitmask over configuration codes.
struct UpSet {
  std::size_t dimension = 0;
  std::uint64_t members = 0;

  [[nodiscard]] bool contains(std::uint64_t code) const noexcept { return (members >> code) & 1ULL; }
};

/// Checks closure against every covering pair.
bool is_upward_closed(const UpSet& u);

/// All up-sets of {0,1}^N. N <= 5.
std::vector<UpSet> enumerate_upsets(std::size_t dimension);

}  // namespace afkg
