#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace afkg {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a over a tag string, used to turn experiment-kind names into stream keys.
constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based random stream.
///
/// The i-th draw of a stream is `mix64(key + i * golden)`, a pure function of
/// (key, i). Keys are derived from (seed, tag, replica) with `derive`, so any
/// replica's stream can be recreated without replaying the others. Satisfies
/// std::uniform_random_bit_generator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key = 0) noexcept : key_(key) {}

  static Rng derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t replica) noexcept {
    return Rng(mix64(mix64(seed) ^ mix64(tag + 0x632be59bd9b4e019ULL) ^
                     mix64(replica * 0xd1b54a32d192ed03ULL + 1)));
  }

  /// Independent child stream; does not advance this stream.
  [[nodiscard]] Rng split(std::uint64_t child) const noexcept {
    return Rng(mix64(key_ ^ mix64(child + 0x8cb92ba72f3d8dd7ULL)));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal via Box-Muller (one value per call; deterministic).
  double normal() noexcept;

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace afkg
