#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cmd/error.hpp"
#include "cmd/rng.hpp"

using cmd::Rng;

TEST_CASE("raw engine stream matches the reference implementation") {
  Rng rng(42);
  CHECK(rng.next_u64() == 13930160852258120406ULL);
  CHECK(rng.next_u64() == 11788048577503494824ULL);
  CHECK(rng.next_u64() == 13874630024467741450ULL);
  CHECK(rng.next_u64() == 2513787319205155662ULL);
}

TEST_CASE("uniform transform is pinned and in range") {
  Rng rng(42);
  CHECK(rng.uniform() == doctest::Approx(0.75515553295453897).epsilon(1e-15));
  CHECK(rng.uniform() == doctest::Approx(0.63903139385469743).epsilon(1e-15));
  CHECK(rng.uniform() == doctest::Approx(0.7521452007480266).epsilon(1e-15));

  Rng rng2(99);
  for (int i = 0; i < 10000; ++i) {
    double u = rng2.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_below is pinned, bounded, and rejects n=0") {
  Rng rng(123);
  std::vector<std::uint64_t> expected = {4, 1, 1, 0, 0, 8, 8, 6};
  for (std::uint64_t e : expected) CHECK(rng.uniform_below(10) == e);

  Rng rng2(5);
  CHECK_THROWS_AS(rng2.uniform_below(0), cmd::InvalidInput);
  for (int i = 0; i < 1000; ++i) CHECK(rng2.uniform_below(3) < 3);
  CHECK(rng2.uniform_below(1) == 0);
}

TEST_CASE("normal transform is pinned and roughly standard") {
  Rng rng(7);
  CHECK(rng.normal() == doctest::Approx(0.71302983388758112).epsilon(1e-12));
  CHECK(rng.normal() == doctest::Approx(-0.23514359878547869).epsilon(1e-12));
  CHECK(rng.normal() == doctest::Approx(1.6105563141402486).epsilon(1e-12));
  CHECK(rng.normal() == doctest::Approx(-1.3000776240143284).epsilon(1e-12));

  Rng rng2(1234);
  const int n = 50000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = rng2.normal();
    sum += x;
    sumsq += x * x;
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("derive_seed matches the splitmix64 reference") {
  CHECK(cmd::derive_seed(1, 0) == 10451216379200822465ULL);
  CHECK(cmd::derive_seed(1, 1) == 13757245211066428519ULL);
  CHECK(cmd::derive_seed(42, 7) == 14769051326987775908ULL);
  CHECK(cmd::derive_seed(1, 0) != cmd::derive_seed(2, 0));
}

TEST_CASE("same seed gives the same stream") {
  Rng a(555), b(555);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("shuffle permutes and is deterministic") {
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;

  Rng a(9), b(9);
  a.shuffle(v);
  b.shuffle(w);
  CHECK(v == w);

  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expected(100);
  std::iota(expected.begin(), expected.end(), 0);
  CHECK(sorted == expected);
  CHECK(v != expected);  // astronomically unlikely to be identity
}
