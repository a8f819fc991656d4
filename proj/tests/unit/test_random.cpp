#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "rlp/random.hpp"

using namespace rlp;

TEST_CASE("streams are deterministic and independent") {
  Rng a(42, Stream::dataset), b(42, Stream::dataset), c(42, Stream::split), d(42, Stream::dataset, 1);
  std::set<std::uint64_t> firsts;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    firsts.insert(x);
  }
  CHECK(firsts.size() == 100);
  CHECK(Rng(42, Stream::dataset).next_u64() != c.next_u64());
  CHECK(Rng(42, Stream::dataset).next_u64() != d.next_u64());
  CHECK(a.counter() == 100);
}

TEST_CASE("splitmix64 finalizer reference values") {
  // Outputs of the reference SplitMix64 generator seeded with 0: the state is
  // advanced by the golden gamma before mixing.
  CHECK(mix64(0x9e3779b97f4a7c15ULL) == 0xe220a8397b1dcdafULL);
  CHECK(mix64(0x9e3779b97f4a7c15ULL * 2) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("Monte Carlo moments") {
  Rng rng(7, Stream::theory);
  constexpr int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0, sg = 0, sb = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    su += u, su2 += u * u;
    const double z = rng.normal();
    sn += z, sn2 += z * z;
    sg += rng.gamma(2.5);
    sb += rng.beta(0.25, 0.25);
  }
  // Tolerances are about five standard errors.
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.004));
  CHECK(su2 / n - (su / n) * (su / n) == doctest::Approx(1.0 / 12).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.012);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sg / n == doctest::Approx(2.5).epsilon(0.01));
  CHECK(sb / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("bounded integers are uniform") {
  Rng rng(8, Stream::theory);
  std::vector<int> counts(7, 0);
  constexpr int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - n / 7) < 5 * std::sqrt(n / 7.0));
}

TEST_CASE("beta with small shape piles up near the endpoints") {
  Rng rng(9, Stream::theory);
  int extreme = 0;
  constexpr int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.beta(0.15, 0.15);
    CHECK_UNARY(x >= 0.0);
    CHECK_UNARY(x <= 1.0);
    if (x < 0.1 || x > 0.9) ++extreme;
  }
  // Beta(0.15, 0.15) puts roughly 70% of its mass outside [0.1, 0.9].
  CHECK(extreme > n / 2);
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(10, Stream::shuffle);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.shuffle(std::span(v));
  std::set<int> s(v.begin(), v.end());
  CHECK(s.size() == 50);
  bool moved = false;
  for (int i = 0; i < 50; ++i) moved = moved || v[i] != i;
  CHECK(moved);
}
