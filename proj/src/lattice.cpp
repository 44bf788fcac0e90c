#include "afkg/lattice.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <numeric>
#include <unordered_map>

#include "afkg/rng.hpp"

namespace afkg {

namespace {

void require_compatible(const SpinConfig& x, const SpinConfig& y) {
  if (x.dimension() != y.dimension() || x.alphabet_size() != y.alphabet_size())
    throw Rejected("configurations differ in dimension or alphabet");
}

std::uint64_t ipow(std::uint64_t base, std::size_t exp) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

SpinConfig::SpinConfig(std::size_t dimension, int alphabet_size) : dimension_(dimension), alphabet_(alphabet_size) {
  if (dimension == 0) throw Rejected("dimension must be positive");
  if (alphabet_size < 2 || alphabet_size > 255) throw Rejected("alphabet size must lie in [2, 255]");
  if (alphabet_ == 2)
    words_.assign((dimension + 63) / 64, 0);
  else
    bytes_.assign(dimension, 0);
}

SpinConfig SpinConfig::from_values(std::span<const int> values, int alphabet_size) {
  SpinConfig x(values.size(), alphabet_size);
  for (std::size_t i = 0; i < values.size(); ++i) x.set(i, values[i]);
  return x;
}

SpinConfig SpinConfig::from_code(std::uint64_t code, std::size_t dimension, int alphabet_size) {
  SpinConfig x(dimension, alphabet_size);
  if (alphabet_size == 2) {
    if (dimension < 64 && (code >> dimension) != 0) throw Rejected("code out of range");
    x.words_[0] = code;
    return x;
  }
  for (std::size_t i = 0; i < dimension; ++i) {
    x.bytes_[i] = static_cast<std::uint8_t>(code % static_cast<std::uint64_t>(alphabet_size));
    code /= static_cast<std::uint64_t>(alphabet_size);
  }
  if (code != 0) throw Rejected("code out of range");
  return x;
}

void SpinConfig::set(std::size_t i, int value) {
  if (i >= dimension_) throw Rejected("coordinate out of range");
  if (value < 0 || value >= alphabet_) throw Rejected("symbol outside alphabet");
  if (alphabet_ == 2) {
    const std::uint64_t bit = 1ULL << (i & 63);
    if (value)
      words_[i >> 6] |= bit;
    else
      words_[i >> 6] &= ~bit;
  } else {
    bytes_[i] = static_cast<std::uint8_t>(value);
  }
}

std::size_t SpinConfig::count_ones() const noexcept {
  if (alphabet_ == 2) {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  return static_cast<std::size_t>(
      std::count(bytes_.begin(), bytes_.end(), static_cast<std::uint8_t>(alphabet_ - 1)));
}

std::uint64_t SpinConfig::total() const noexcept {
  if (alphabet_ == 2) return count_ones();
  return std::accumulate(bytes_.begin(), bytes_.end(), std::uint64_t{0});
}

std::uint64_t SpinConfig::code() const {
  if (alphabet_ == 2) {
    if (dimension_ > 64) throw Rejected("configuration too large to encode");
    return words_[0];
  }
  if (!state_count(dimension_, alphabet_)) throw Rejected("configuration too large to encode");
  std::uint64_t c = 0;
  for (std::size_t i = dimension_; i-- > 0;) c = c * static_cast<std::uint64_t>(alphabet_) + bytes_[i];
  return c;
}

std::vector<int> SpinConfig::values() const {
  std::vector<int> v(dimension_);
  for (std::size_t i = 0; i < dimension_; ++i) v[i] = (*this)[i];
  return v;
}

bool SpinConfig::leq(const SpinConfig& other) const {
  require_compatible(*this, other);
  if (alphabet_ == 2) {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & ~other.words_[w]) return false;
    return true;
  }
  for (std::size_t i = 0; i < dimension_; ++i)
    if (bytes_[i] > other.bytes_[i]) return false;
  return true;
}

SpinConfig meet(const SpinConfig& x, const SpinConfig& y) {
  require_compatible(x, y);
  SpinConfig z = x;
  if (x.binary()) {
    for (std::size_t w = 0; w < z.words_.size(); ++w) z.words_[w] &= y.words_[w];
  } else {
    for (std::size_t i = 0; i < z.dimension_; ++i) z.bytes_[i] = std::min(x.bytes_[i], y.bytes_[i]);
  }
  return z;
}

SpinConfig join(const SpinConfig& x, const SpinConfig& y) {
  require_compatible(x, y);
  SpinConfig z = x;
  if (x.binary()) {
    for (std::size_t w = 0; w < z.words_.size(); ++w) z.words_[w] |= y.words_[w];
  } else {
    for (std::size_t i = 0; i < z.dimension_; ++i) z.bytes_[i] = std::max(x.bytes_[i], y.bytes_[i]);
  }
  return z;
}

std::size_t hamming(const SpinConfig& x, const SpinConfig& y) {
  require_compatible(x, y);
  std::size_t d = 0;
  if (x.binary()) {
    for (std::size_t w = 0; w < x.words_.size(); ++w) d += static_cast<std::size_t>(std::popcount(x.words_[w] ^ y.words_[w]));
  } else {
    for (std::size_t i = 0; i < x.dimension_; ++i) d += (x.bytes_[i] != y.bytes_[i]);
  }
  return d;
}

double mean_value(const SpinConfig& x) {
  return static_cast<double>(x.total()) /
         (static_cast<double>(x.dimension()) * static_cast<double>(x.alphabet_size() - 1));
}

std::optional<std::uint64_t> state_count(std::size_t dimension, int alphabet_size) {
  std::uint64_t c = 1;
  for (std::size_t i = 0; i < dimension; ++i) {
    if (c > (1ULL << 62) / static_cast<std::uint64_t>(alphabet_size)) return std::nullopt;
    c *= static_cast<std::uint64_t>(alphabet_size);
  }
  return c;
}

// ---------------------------------------------------------------- Region

Region::Region(std::size_t dimension, int alphabet_size, Predicate contains, std::string label)
    : dimension_(dimension), alphabet_(alphabet_size), predicate_(std::move(contains)), label_(std::move(label)) {}

Region Region::full(std::size_t dimension, int alphabet_size) {
  Region r(dimension, alphabet_size, [](const SpinConfig&) { return true; }, "full cube");
  r.full_ = true;
  r.certified_diameter_ = dimension;
  return r;
}

Region Region::from_codes(std::size_t dimension, int alphabet_size, std::span<const std::uint64_t> codes,
                          std::string label) {
  const auto count = state_count(dimension, alphabet_size);
  if (!count || *count > (1ULL << 26)) throw Rejected("explicit enumeration needs |A|^N <= 2^26");
  auto table = std::make_shared<std::vector<bool>>(*count, false);
  for (auto c : codes) {
    if (c >= *count) throw Rejected("member code out of range");
    (*table)[c] = true;
  }
  Region r(dimension, alphabet_size, nullptr, std::move(label));
  r.table_ = std::move(table);
  return r;
}

Region Region::enumerated() const {
  if (table_) return *this;
  const auto count = state_count(dimension_, alphabet_);
  if (!count || *count > (1ULL << 26)) throw Rejected("explicit enumeration needs |A|^N <= 2^26");
  auto table = std::make_shared<std::vector<bool>>(*count, false);
  for (std::uint64_t c = 0; c < *count; ++c)
    (*table)[c] = full_ || predicate_(SpinConfig::from_code(c, dimension_, alphabet_));
  Region r = *this;
  r.table_ = std::move(table);
  return r;
}

bool Region::contains(const SpinConfig& x) const {
  if (x.dimension() != dimension_ || x.alphabet_size() != alphabet_) throw Rejected("region/configuration mismatch");
  if (full_) return true;
  if (table_) return (*table_)[x.code()];
  return predicate_(x);
}

bool Region::contains_code(std::uint64_t code) const {
  if (full_) return true;
  if (table_) return code < table_->size() && (*table_)[code];
  return predicate_(SpinConfig::from_code(code, dimension_, alphabet_));
}

std::vector<std::uint64_t> Region::member_codes() const {
  if (!table_) return enumerated().member_codes();
  std::vector<std::uint64_t> out;
  for (std::uint64_t c = 0; c < table_->size(); ++c)
    if ((*table_)[c]) out.push_back(c);
  return out;
}

// ---------------------------------------------------- intrinsic distances

namespace {

template <class Visit>
void for_each_neighbor_code(std::uint64_t code, std::size_t dimension, int alphabet, Visit&& visit) {
  if (alphabet == 2) {
    for (std::size_t i = 0; i < dimension; ++i) visit(code ^ (1ULL << i));
    return;
  }
  std::uint64_t place = 1;
  for (std::size_t i = 0; i < dimension; ++i) {
    const auto a = static_cast<std::uint64_t>(alphabet);
    const std::uint64_t digit = (code / place) % a;
    for (std::uint64_t v = 0; v < a; ++v)
      if (v != digit) visit(code - digit * place + v * place);
    place *= a;
  }
}

// Breadth-first distances from `source` within the region; explores only members.
std::unordered_map<std::uint64_t, Distance> bfs(const Region& region, std::uint64_t source) {
  std::unordered_map<std::uint64_t, Distance> dist;
  std::deque<std::uint64_t> queue;
  dist.emplace(source, 0);
  queue.push_back(source);
  while (!queue.empty()) {
    const std::uint64_t c = queue.front();
    queue.pop_front();
    const Distance d = dist[c];
    for_each_neighbor_code(c, region.dimension(), region.alphabet_size(), [&](std::uint64_t nb) {
      if (dist.contains(nb) || !region.contains_code(nb)) return;
      dist.emplace(nb, d + 1);
      queue.push_back(nb);
    });
  }
  return dist;
}

}  // namespace

Distance intrinsic_distance(const Region& region, const SpinConfig& a, const SpinConfig& b) {
  if (!region.contains(a) || !region.contains(b)) throw Rejected("intrinsic distance endpoints must lie in the region");
  if (a == b) return 0;
  if (region.is_full()) return hamming(a, b);
  if (!state_count(region.dimension(), region.alphabet_size())) throw Rejected("configuration space too large for path search");
  const auto dist = bfs(region, a.code());
  const auto it = dist.find(b.code());
  return it == dist.end() ? kInfinite : it->second;
}

Distance intrinsic_diameter(const Region& region) {
  if (auto d = region.certified_diameter()) return *d;
  const auto count = state_count(region.dimension(), region.alphabet_size());
  if (!region.has_table() && (!count || *count > (1ULL << 22)))
    throw Rejected("region is not enumerable and carries no certified diameter bound");
  const auto members = region.has_table() ? region.member_codes() : region.enumerated().member_codes();
  if (members.empty()) return 0;
  Distance best = 0;
  for (auto src : members) {
    const auto dist = bfs(region, src);
    if (dist.size() != members.size()) return kInfinite;
    for (const auto& [code, d] : dist) best = std::max(best, d);
  }
  return best;
}

// --------------------------------------------------- increasing functions

bool check_monotone_exhaustive(const IncreasingFunction& f, std::size_t dimension, int alphabet_size) {
  const auto count = state_count(dimension, alphabet_size);
  if (!count || *count > (1ULL << 22)) throw Rejected("exhaustive monotonicity check needs |A|^N <= 2^22");
  for (std::uint64_t c = 0; c < *count; ++c) {
    SpinConfig x = SpinConfig::from_code(c, dimension, alphabet_size);
    const double fx = f(x);
    for (std::size_t i = 0; i < dimension; ++i) {
      const int v = x[i];
      if (v + 1 >= alphabet_size) continue;
      SpinConfig y = x;
      y.set(i, v + 1);
      if (f(y) < fx) return false;
    }
  }
  return true;
}

bool check_monotone_sampled(const IncreasingFunction& f, std::size_t dimension, int alphabet_size,
                            std::size_t trials, Rng& rng) {
  SpinConfig x(dimension, alphabet_size);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < dimension; ++i)
      x.set(i, static_cast<int>(rng.below(static_cast<std::uint64_t>(alphabet_size))));
    const std::size_t i = rng.below(dimension);
    if (x[i] + 1 >= alphabet_size) continue;
    SpinConfig y = x;
    y.set(i, x[i] + 1);
    if (f(y) < f(x)) return false;
  }
  return true;
}

double exact_sup_norm(const std::function<double(const SpinConfig&)>& f, std::size_t dimension, int alphabet_size) {
  const auto count = state_count(dimension, alphabet_size);
  if (!count || *count > (1ULL << 22)) throw Rejected("exact sup norm needs |A|^N <= 2^22");
  double s = 0.0;
  for (std::uint64_t c = 0; c < *count; ++c)
    s = std::max(s, std::abs(f(SpinConfig::from_code(c, dimension, alphabet_size))));
  return s;
}

// --------------------------------------------------------------- up-sets

bool is_upward_closed(const UpSet& u) {
  const std::uint64_t n_states = 1ULL << u.dimension;
  for (std::uint64_t x = 0; x < n_states; ++x) {
    if (!u.contains(x)) continue;
    for (std::size_t i = 0; i < u.dimension; ++i)
      if (!u.contains(x | (1ULL << i))) return false;
  }
  return true;
}

std::vector<UpSet> enumerate_upsets(std::size_t dimension) {
  if (dimension == 0) throw Rejected("dimension must be positive");
  if (dimension > 5)
    throw Rejected("up-set enumeration is capped at N = 5 (the Dedekind number for N = 6 is 7828354); "
                   "use sampled increasing functions instead");
  const std::uint64_t n_states = 1ULL << dimension;
  // Top-down order: every cover of x is decided before x.
  std::vector<std::uint64_t> order(n_states);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [](std::uint64_t a, std::uint64_t b) { return std::popcount(a) > std::popcount(b); });

  std::vector<UpSet> out;
  auto recurse = [&](auto&& self, std::size_t pos, std::uint64_t members) -> void {
    if (pos == order.size()) {
      out.push_back(UpSet{dimension, members});
      return;
    }
    const std::uint64_t x = order[pos];
    self(self, pos + 1, members);
    bool covers_in = true;
    for (std::size_t i = 0; i < dimension && covers_in; ++i) {
      const std::uint64_t y = x | (1ULL << i);
      if (y != x && !((members >> y) & 1ULL)) covers_in = false;
    }
    if (covers_in) self(self, pos + 1, members | (1ULL << x));
  };
  recurse(recurse, 0, 0);
  std::sort(out.begin(), out.end(), [](const UpSet& a, const UpSet& b) { return a.members < b.members; });
  return out;
}

}  // namespace afkg
