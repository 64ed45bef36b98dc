#include "xbar/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"

using namespace xbar;

TEST_CASE("same seed reproduces the same stream") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.uniform01() == b.uniform01());
    CHECK(a.gaussian(0.0, 1.0) == b.gaussian(0.0, 1.0));
  }
}

TEST_CASE("different seeds diverge") {
  Rng a(1);
  Rng b(2);
  int same = 0;
  for (int i = 0; i < 64; ++i) {
    if (a.next_u64() == b.next_u64()) ++same;
  }
  CHECK(same == 0);
}

TEST_CASE("derive_seed separates streams and bases") {
  CHECK(derive_seed(7, kStreamInit) != derive_seed(7, kStreamVariation));
  CHECK(derive_seed(7, kStreamInit) != derive_seed(8, kStreamInit));
  CHECK(derive_seed(7, kStreamShuffle) == derive_seed(7, kStreamShuffle));
}

TEST_CASE("uniform01 stays in [0, 1)") {
  Rng rng(3);
  double lo = 1.0;
  double hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = rng.uniform01();
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(lo < 0.001);  // both tails get visited
  CHECK(hi > 0.999);
}

TEST_CASE("uniform_int covers the inclusive range uniformly") {
  Rng rng(11);
  std::vector<int> counts(9, 0);
  for (int i = 0; i < 90000; ++i) {
    const std::uint32_t x = rng.uniform_int(8);
    REQUIRE(x <= 8);
    ++counts[x];
  }
  for (int c : counts) {
    CHECK(c > 9000);  // expected 10000 each; loose 10% floor
    CHECK(c < 11000);
  }
  SUBCASE("bound 0 always returns 0") {
    for (int i = 0; i < 10; ++i) CHECK(rng.uniform_int(0) == 0);
  }
}

TEST_CASE("gaussian matches its first two moments") {
  Rng rng(17);
  const int n = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gaussian(2.0, 3.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(mean == doctest::Approx(2.0).epsilon(0.02));
  CHECK(var == doctest::Approx(9.0).epsilon(0.02));
}

TEST_CASE("shuffle is a deterministic permutation") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;
  Rng a(5);
  Rng b(5);
  shuffle_in_place(v, a);
  shuffle_in_place(w, b);
  CHECK(v == w);
  CHECK(v != std::vector<int>(v.size()) /* not all zero */);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(50);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);  // still the same elements
  Rng c(6);
  std::vector<int> u = expect;
  shuffle_in_place(u, c);
  CHECK(u != v);  // different seed, different order
}
