#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "sparsebandit/rng.hpp"

using namespace sparsebandit;

TEST_CASE("identical (seed, stream) pairs are bit-identical") {
  RngStream a(12345, 7);
  RngStream b(12345, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  // Including through the floating-point paths.
  RngStream c(99, 3), d(99, 3);
  for (int i = 0; i < 200; ++i) {
    CHECK(c.uniform() == d.uniform());
    CHECK(c.normal() == d.normal());
    CHECK(c.uniform_int(17) == d.uniform_int(17));
    CHECK(c.sign() == d.sign());
  }
}

TEST_CASE("different seeds and streams diverge") {
  RngStream a(1, 0), b(2, 0), c(1, 1);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    if (va == b.next_u64()) ++same_ab;
    if (va == c.next_u64()) ++same_ac;
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("substreams are deterministic and independent of parent position") {
  RngStream parent(42, 5);
  RngStream s1 = parent.substream(3);
  parent.next_u64();  // advancing the parent must not change derived streams
  RngStream s2 = parent.substream(3);
  for (int i = 0; i < 100; ++i) CHECK(s1.next_u64() == s2.next_u64());
  RngStream other = parent.substream(4);
  CHECK(other.next_u64() != RngStream(42, 5).substream(3).next_u64());
}

TEST_CASE("uniform lies in [0,1) and has the right moments") {
  RngStream rng(2024, 0);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.05));
}

TEST_CASE("normal moments and tail sanity") {
  RngStream rng(7, 11);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  int beyond3 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    CHECK(std::isfinite(z));
    sum += z;
    sumsq += z * z;
    if (std::fabs(z) > 3.0) ++beyond3;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  // P(|Z|>3) ~ 0.0027; allow a wide band.
  CHECK(beyond3 > 100);
  CHECK(beyond3 < 600);
}

TEST_CASE("normal(mean, stddev) rescales") {
  RngStream a(5, 5), b(5, 5);
  for (int i = 0; i < 50; ++i) {
    const double z = a.normal();
    CHECK(b.normal(2.0, 3.0) == doctest::Approx(2.0 + 3.0 * z).epsilon(1e-12));
  }
}

TEST_CASE("uniform_int covers its range without bias artifacts") {
  RngStream rng(31337, 2);
  std::vector<int> counts(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto v = rng.uniform_int(10);
    REQUIRE(v < 10);
    ++counts[static_cast<int>(v)];
  }
  for (int c : counts) {
    CHECK(c > n / 10 - 600);
    CHECK(c < n / 10 + 600);
  }
  CHECK(rng.uniform_int(1) == 0);
  CHECK(rng.uniform_int(0) == 0);
}

TEST_CASE("sign is a fair coin") {
  RngStream rng(8, 8);
  int plus = 0;
  for (int i = 0; i < 100000; ++i) {
    const int s = rng.sign();
    CHECK((s == 1 || s == -1));
    if (s == 1) ++plus;
  }
  CHECK(plus > 49000);
  CHECK(plus < 51000);
}

TEST_CASE("stream_label is stable and argument-sensitive") {
  const auto h = stream_label("run", 3, 1000);
  CHECK(h == stream_label("run", 3, 1000));
  CHECK(h != stream_label("run", 4, 1000));
  CHECK(h != stream_label("run", 3, 1001));
  CHECK(h != stream_label("instance", 3, 1000));
}

TEST_CASE("seed zero still produces a healthy stream") {
  RngStream rng(0, 0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(rng.next_u64());
  CHECK(seen.size() == 1000);
}
