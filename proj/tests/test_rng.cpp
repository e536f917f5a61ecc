#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "aoifl/rng.hpp"

using namespace aoifl;

TEST_CASE("engine is the standard 64-bit Mersenne twister") {
  // 10000th output of a default-seeded mt19937_64, fixed by the standard.
  Rng rng(5489u);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next_u64();
  CHECK(v == 9981545732273789042ull);
}

TEST_CASE("derive gives distinct, reproducible streams") {
  Rng a = Rng::derive(7, 1);
  Rng b = Rng::derive(7, 1);
  Rng c = Rng::derive(7, 2);
  Rng d = Rng::derive(8, 1);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  CHECK(x != d.next_u64());
}

TEST_CASE("uniform lies in [0, 1) with mean 1/2") {
  Rng rng(1);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal and exponential moments") {
  Rng rng(2);
  const int n = 200000;
  double s1 = 0, s2 = 0, e1 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    e1 += rng.exponential();
  }
  CHECK(std::abs(s1 / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(e1 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("index is uniform and in range") {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.index(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  for (int c : counts) CHECK(std::abs(c - n / 7) < 400);
  CHECK(rng.index(1) == 0);
}

TEST_CASE("permutation contains every index once") {
  Rng rng(4);
  auto p = rng.permutation(50);
  std::set<std::size_t> seen(p.begin(), p.end());
  CHECK(seen.size() == 50);
  CHECK(*seen.rbegin() == 49);
  std::vector<std::size_t> id(50);
  std::iota(id.begin(), id.end(), 0);
  CHECK(p != id);
}

TEST_CASE("splitmix64 reference values") {
  // First output of the reference generator seeded with 0.
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
}
