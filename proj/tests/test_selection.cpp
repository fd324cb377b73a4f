#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "cmd/error.hpp"
#include "cmd/ndmath.hpp"
#include "cmd/rng.hpp"
#include "cmd/selection.hpp"
#include "test_util.hpp"

using namespace cmd;

namespace {

SelectionPolicy policy_of(SelectionMode mode, double eta, double b2, int gamma,
                          std::size_t classes) {
  SelectionPolicy p;
  p.mode = mode;
  p.eta = eta;
  p.b2 = b2;
  p.gamma = gamma;
  p.classes = classes;
  return p;
}

}  // namespace

TEST_CASE("threshold worked examples") {
  SelectionPolicy st = policy_of(SelectionMode::Static, 2.0, 0.0, 100, 100);
  double chi = threshold(st, 0);
  CHECK(chi == doctest::Approx(2.3025850929940459).epsilon(1e-12));
  CHECK(std::abs(chi - 2.30259) < 1e-5);
  CHECK(threshold(st, 100) == doctest::Approx(chi).epsilon(1e-12));

  SelectionPolicy eta1 = policy_of(SelectionMode::Static, 1.0, 0.0, 100, 100);
  CHECK(threshold(eta1, 50) ==
        doctest::Approx(ndmath::uniform_entropy(100)).epsilon(1e-12));

  SelectionPolicy zero = policy_of(SelectionMode::Zero, 2.0, 0.0, 100, 10);
  CHECK(threshold(zero, 0) == 0.0);
  CHECK(threshold(zero, 100) == 0.0);

  SelectionPolicy all = policy_of(SelectionMode::All, 2.0, 0.0, 100, 10);
  CHECK(std::isinf(threshold(all, 0)));
  CHECK(threshold(all, 77) > 0.0);
}

TEST_CASE("progressive threshold shape") {
  double hu = ndmath::uniform_entropy(10);

  SUBCASE("midpoint equals the static value for any gain") {
    for (double b2 : {-6.0, -1.0, 0.0, 2.5, 8.0}) {
      SelectionPolicy p =
          policy_of(SelectionMode::Progressive, 3.0, b2, 100, 10);
      CHECK(threshold(p, 50) == doctest::Approx(hu / 3.0).epsilon(1e-12));
    }
  }

  SUBCASE("zero gain degenerates to static at every epoch") {
    SelectionPolicy prog =
        policy_of(SelectionMode::Progressive, 2.0, 0.0, 100, 10);
    SelectionPolicy st = policy_of(SelectionMode::Static, 2.0, 5.0, 100, 10);
    for (int t = 0; t <= 100; ++t)
      CHECK(threshold(prog, t) ==
            doctest::Approx(threshold(st, t)).epsilon(1e-12));
  }

  SUBCASE("positive gain is non-decreasing, negative non-increasing") {
    SelectionPolicy rising =
        policy_of(SelectionMode::Progressive, 2.0, 4.0, 100, 10);
    SelectionPolicy falling =
        policy_of(SelectionMode::Progressive, 2.0, -4.0, 100, 10);
    for (int t = 0; t < 100; ++t) {
      CHECK(threshold(rising, t + 1) >= threshold(rising, t) - 1e-12);
      CHECK(threshold(falling, t + 1) <= threshold(falling, t) + 1e-12);
    }
    CHECK(threshold(rising, 100) > threshold(rising, 0));
    CHECK(threshold(falling, 100) < threshold(falling, 0));
  }

  SUBCASE("range stays inside (0, 2 H(u)/eta)") {
    SelectionPolicy p =
        policy_of(SelectionMode::Progressive, 2.0, -4.0, 100, 10);
    for (int t = 0; t <= 100; ++t) {
      double chi = threshold(p, t);
      CHECK(chi > 0.0);
      CHECK(chi < 2.0 * hu / 2.0);
    }
  }
}

TEST_CASE("threshold is antitone in eta") {
  for (double b2 : {-3.0, 0.0, 3.0}) {
    SelectionPolicy lo = policy_of(SelectionMode::Progressive, 1.0, b2, 50, 10);
    SelectionPolicy hi = policy_of(SelectionMode::Progressive, 4.0, b2, 50, 10);
    for (int t = 0; t <= 50; ++t)
      CHECK(threshold(lo, t) >= threshold(hi, t));
  }
}

TEST_CASE("threshold validates its inputs") {
  SelectionPolicy p = policy_of(SelectionMode::Static, 2.0, 0.0, 100, 10);
  CHECK_THROWS_AS(threshold(p, -1), InvalidInput);
  CHECK_THROWS_AS(threshold(p, 101), InvalidInput);

  CHECK_THROWS_AS(
      validate(policy_of(SelectionMode::Static, 0.0, 0.0, 100, 10)),
      InvalidInput);
  CHECK_THROWS_AS(
      validate(policy_of(SelectionMode::Progressive, -2.0, 0.0, 100, 10)),
      InvalidInput);
  CHECK_THROWS_AS(
      validate(policy_of(SelectionMode::Static, 2.0, 0.0, 0, 10)),
      InvalidInput);
  CHECK_THROWS_AS(
      validate(policy_of(SelectionMode::Static, 2.0, 0.0, 100, 1)),
      InvalidInput);
  CHECK_NOTHROW(validate(policy_of(SelectionMode::Zero, -1.0, 0.0, 100, 10)));
}

TEST_CASE("is_confident is a strict entropy comparison") {
  double hu = ndmath::uniform_entropy(4);
  std::vector<double> onehot = {1.0, 0.0, 0.0, 0.0};
  std::vector<double> uniform(4, 0.25);

  CHECK(is_confident(onehot, hu / 2.0));
  CHECK_FALSE(is_confident(uniform, hu / 2.0));
  CHECK_FALSE(is_confident(onehot, 0.0));
  CHECK_FALSE(is_confident(uniform, 0.0));
  CHECK(is_confident(uniform, std::numeric_limits<double>::infinity()));

  // Boundary: chi exactly at the entropy is excluded.
  double h = ndmath::entropy(uniform);
  CHECK_FALSE(is_confident(uniform, h));
}

TEST_CASE("select_batch matches a brute-force filter") {
  Rng rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix preds = testutil::random_prob_rows(rng, 16, 5);
    double chi = rng.uniform(0.0, ndmath::uniform_entropy(5));
    std::vector<std::size_t> got = select_batch(preds, chi);

    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < preds.rows; ++i)
      if (ndmath::entropy(preds.row(i), preds.cols) < chi) expected.push_back(i);
    CHECK(got == expected);
    CHECK(std::is_sorted(got.begin(), got.end()));
  }
}

TEST_CASE("select_batch degenerate thresholds") {
  Rng rng(29);
  Matrix preds = testutil::random_prob_rows(rng, 10, 4);

  CHECK(select_batch(preds, 0.0).empty());

  std::vector<std::size_t> all =
      select_batch(preds, std::numeric_limits<double>::infinity());
  REQUIRE(all.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);

  Matrix uniform(6, 4);
  for (double& v : uniform.data) v = 0.25;
  CHECK(select_batch(uniform, ndmath::uniform_entropy(4) / 2.0).empty());
}

TEST_CASE("selected set grows with chi") {
  Rng rng(37);
  Matrix preds = testutil::random_prob_rows(rng, 24, 6);
  double hu = ndmath::uniform_entropy(6);
  std::vector<std::size_t> prev;
  for (double frac : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2}) {
    std::vector<std::size_t> cur = select_batch(preds, frac * hu);
    CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    prev = std::move(cur);
  }
}

TEST_CASE("selection mode strings round-trip") {
  for (const char* name : {"zero", "all", "static", "progressive"}) {
    CHECK(to_string(selection_mode_from_string(name)) == name);
  }
  CHECK_THROWS_AS(selection_mode_from_string("half"), InvalidInput);
}
