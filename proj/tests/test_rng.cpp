#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "dbn/rng.hpp"

using dbn::Rng;

TEST_CASE("splitmix64 and fnv1a64 match published reference values") {
  std::uint64_t s = 0;
  CHECK(dbn::splitmix64(s) == 0xE220A8397B1DCDAFULL);
  CHECK(dbn::splitmix64(s) == 0x6E789E6AA1B965F4ULL);
  CHECK(dbn::fnv1a64("") == 0xCBF29CE484222325ULL);
  CHECK(dbn::fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
  CHECK(dbn::fnv1a64("foobar") == 0x85944171F73967E8ULL);
}

TEST_CASE("stage seeds differ per stage and are stable") {
  CHECK(dbn::stage_seed(7, "train") == dbn::stage_seed(7, "train"));
  CHECK(dbn::stage_seed(7, "train") != dbn::stage_seed(7, "split"));
  CHECK(dbn::stage_seed(7, "train") != dbn::stage_seed(8, "train"));
}

TEST_CASE("same seed gives the same stream, seed 0 included") {
  Rng a(0), b(0), c(1);
  std::set<std::uint64_t> seen;
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
    seen.insert(x);
  }
  CHECK(differs);
  CHECK(seen.size() == 1000);
}

TEST_CASE("uniform draws stay in range and cover it") {
  Rng r(3);
  double lo = 1, hi = 0, sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo < 1e-3);
  CHECK(hi > 1 - 1e-3);
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("below is unbiased enough over a small range") {
  Rng r(4);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[r.below(7)];
  double chi2 = 0;
  for (int h : hist) chi2 += (h - 10000.0) * (h - 10000.0) / 10000.0;
  CHECK(chi2 < 22.5);  // 6 dof, p ~ 0.001
  CHECK(r.below(1) == 0);
}

TEST_CASE("normal draws have unit moments") {
  Rng r(5);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}
