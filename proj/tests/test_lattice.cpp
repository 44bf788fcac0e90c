#include <doctest.h>

#include <set>

#include "afkg/lattice.hpp"
#include "afkg/rng.hpp"

using namespace afkg;

TEST_CASE("rng streams are pure functions of (seed, tag, replica)") {
  Rng a = Rng::derive(7, tag_hash("gcwm-fkg"), 3);
  Rng b = Rng::derive(7, tag_hash("gcwm-fkg"), 3);
  Rng c = Rng::derive(7, tag_hash("gcwm-fkg"), 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c();
    CHECK(x == y);
    differs = differs || x != z;
  }
  CHECK(differs);
  Rng s = a.split(1);
  CHECK(s.key() != a.split(2).key());
  CHECK(a.split(1).key() == s.key());
}

TEST_CASE("rng below and uniform stay in range") {
  Rng r(42);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = r.below(7);
    REQUIRE(v < 7);
    ++counts[v];
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("spin config codes, order, meet and join") {
  const auto x = SpinConfig::from_code(0b1011, 4);
  const auto y = SpinConfig::from_code(0b0110, 4);
  CHECK(x.code() == 0b1011);
  CHECK(x.count_ones() == 3);
  CHECK(meet(x, y).code() == 0b0010);
  CHECK(join(x, y).code() == 0b1111);
  CHECK(hamming(x, y) == 3);
  CHECK(meet(x, y).leq(x));
  CHECK(x.leq(join(x, y)));
  CHECK_FALSE(x.leq(y));
  CHECK(mean_value(x) == doctest::Approx(0.75));

  const std::vector<int> vals{0, 2, 1};
  const auto t = SpinConfig::from_values(vals, 3);
  CHECK(t.code() == 0 + 2 * 3 + 1 * 9);
  CHECK(SpinConfig::from_code(t.code(), 3, 3) == t);
  CHECK(mean_value(t) == doctest::Approx(0.5));
}

TEST_CASE("lattice identities hold on random pairs") {
  Rng r(5);
  for (int i = 0; i < 500; ++i) {
    const auto x = SpinConfig::from_code(r.below(1 << 10), 10);
    const auto y = SpinConfig::from_code(r.below(1 << 10), 10);
    const auto lo = meet(x, y), hi = join(x, y);
    CHECK(lo.count_ones() + hi.count_ones() == x.count_ones() + y.count_ones());
    CHECK(lo.leq(hi));
    CHECK(hamming(x, y) == hamming(lo, hi));
  }
}

TEST_CASE("state counts") {
  CHECK(state_count(10, 2).value() == 1024);
  CHECK(state_count(5, 3).value() == 243);
  CHECK_FALSE(state_count(70, 2).has_value());
}

TEST_CASE("intrinsic distance in a disconnected region is infinite") {
  // {000, 111} has no Hamming-1 path inside.
  const std::vector<std::uint64_t> codes{0, 7};
  const auto region = Region::from_codes(3, 2, codes, "ends");
  CHECK(intrinsic_distance(region, SpinConfig::from_code(0, 3), SpinConfig::from_code(7, 3)) == kInfinite);
  CHECK(intrinsic_diameter(region) == kInfinite);
}

TEST_CASE("intrinsic diameter of the full cube is N") {
  CHECK(intrinsic_diameter(Region::full(5).enumerated()) == 5);
}

TEST_CASE("path-constrained distance can exceed Hamming distance") {
  // Levels {1, 2} of the 4-cube: 0011 -> 1100 must pass through level 1 or 2.
  std::vector<std::uint64_t> codes;
  for (std::uint64_t c = 0; c < 16; ++c) {
    const int k = __builtin_popcountll(c);
    if (k == 1 || k == 2) codes.push_back(c);
  }
  const auto region = Region::from_codes(4, 2, codes, "levels 1-2");
  CHECK(intrinsic_distance(region, SpinConfig::from_code(0b0011, 4), SpinConfig::from_code(0b1100, 4)) == 4);
  CHECK(intrinsic_diameter(region) == 4);
}

TEST_CASE("up-set counts are the Dedekind numbers") {
  const std::size_t dedekind[] = {2, 3, 6, 20, 168, 7581};
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto ups = enumerate_upsets(n);
    CHECK(ups.size() == dedekind[n]);
    std::set<std::uint64_t> distinct;
    for (const auto& u : ups) {
      CHECK(is_upward_closed(u));
      distinct.insert(u.members);
    }
    CHECK(distinct.size() == ups.size());
  }
  CHECK_THROWS_AS(enumerate_upsets(6), Rejected);
}

TEST_CASE("monotonicity checks") {
  IncreasingFunction up{[](const SpinConfig& x) { return static_cast<double>(x.count_ones()); }, true, {}, 4.0,
                        "count"};
  IncreasingFunction down{[](const SpinConfig& x) { return -static_cast<double>(x[0]); }, true, {}, 1.0, "neg"};
  CHECK(check_monotone_exhaustive(up, 4, 2));
  CHECK_FALSE(check_monotone_exhaustive(down, 4, 2));
  Rng r(3);
  CHECK(check_monotone_sampled(up, 30, 2, 1000, r));
  CHECK_FALSE(check_monotone_sampled(down, 30, 2, 1000, r));
  CHECK(exact_sup_norm([](const SpinConfig& x) { return 1.0 - 3.0 * x[1]; }, 3, 2) == doctest::Approx(2.0));
}
