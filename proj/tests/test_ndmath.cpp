#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "cmd/error.hpp"
#include "cmd/ndmath.hpp"
#include "cmd/rng.hpp"

using cmd::Matrix;
using cmd::Rng;
namespace nd = cmd::ndmath;

namespace {

std::vector<double> random_dist(Rng& rng, std::size_t n) {
  std::vector<double> logits(n);
  for (double& v : logits) v = rng.uniform(-3.0, 3.0);
  return nd::softmax(logits);
}

}  // namespace

TEST_CASE("softmax basics") {
  std::vector<double> uniform = nd::softmax({0.0, 0.0, 0.0, 0.0});
  for (double v : uniform) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));

  std::vector<double> p = nd::softmax({1.0, 2.0, 3.0});
  CHECK(p[0] == doctest::Approx(0.090030573170380462).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.24472847105479764).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.66524095577482178).epsilon(1e-12));

  std::vector<double> shifted = nd::softmax({1.0 + 17.5, 2.0 + 17.5, 3.0 + 17.5});
  for (std::size_t i = 0; i < 3; ++i) CHECK(p[i] == shifted[i]);

  CHECK_THROWS_AS(nd::softmax({}), cmd::InvalidInput);
  CHECK_THROWS_AS(nd::softmax({1.0, std::nan("")}), cmd::InvalidInput);
  CHECK_THROWS_AS(nd::softmax({1.0, std::numeric_limits<double>::infinity()}),
                  cmd::InvalidInput);
}

TEST_CASE("softmax always yields a distribution") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + rng.uniform_below(10);
    std::vector<double> logits(n);
    for (double& v : logits) v = rng.uniform(-30.0, 30.0);
    std::vector<double> p = nd::softmax(logits);
    double total = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("entropy oracle values") {
  CHECK(nd::entropy({1.0, 0.0, 0.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(nd::entropy({1.0, 0.0, 0.0, 0.0}) >= 0.0);

  std::vector<double> u100(100, 0.01);
  CHECK(nd::entropy(u100) == doctest::Approx(4.6050701909877558).epsilon(1e-12));
  CHECK(nd::entropy(u100) == doctest::Approx(std::log(100.0)).epsilon(1e-3));

  CHECK(nd::entropy({0.5, 0.25, 0.25}) ==
        doctest::Approx(1.0397177708449181).epsilon(1e-12));
  CHECK(nd::entropy({0.7, 0.1, 0.1, 0.1}) ==
        doctest::Approx(0.94044398867104062).epsilon(1e-12));
}

TEST_CASE("entropy stays nonnegative and below the uniform bound") {
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = 2 + rng.uniform_below(20);
    std::vector<double> p = random_dist(rng, n);
    double h = nd::entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= nd::uniform_entropy(n) + 1e-3);
  }
}

TEST_CASE("entropy is monotone under mixing toward uniform") {
  Rng rng(78);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + rng.uniform_below(8);
    std::vector<double> p = random_dist(rng, n);
    double a = rng.uniform();
    std::vector<double> mixed(n);
    for (std::size_t i = 0; i < n; ++i)
      mixed[i] = (1.0 - a) * p[i] + a / static_cast<double>(n);
    CHECK(nd::entropy(mixed) >= nd::entropy(p) - 1e-9);
  }
}

TEST_CASE("uniform_entropy closed forms") {
  CHECK(nd::uniform_entropy(2) == doctest::Approx(0.69314718055994529).epsilon(1e-15));
  CHECK(nd::uniform_entropy(10) == doctest::Approx(2.3025850929940459).epsilon(1e-15));
  CHECK(nd::uniform_entropy(100) == doctest::Approx(4.6051701859880918).epsilon(1e-15));
  CHECK_THROWS_AS(nd::uniform_entropy(0), cmd::InvalidInput);
  CHECK_THROWS_AS(nd::uniform_entropy(1), cmd::InvalidInput);
}

TEST_CASE("cross_entropy definition and oracle value") {
  std::vector<double> p = {0.7, 0.2, 0.1};
  CHECK(nd::cross_entropy({0.0, 1.0, 0.0}, p) ==
        doctest::Approx(-std::log(0.2 + 1e-6)).epsilon(1e-12));
  CHECK(nd::cross_entropy(p, p) == doctest::Approx(nd::entropy(p)).epsilon(1e-9));
  CHECK(nd::cross_entropy({0.85, 0.1, 0.05}, p) ==
        doctest::Approx(0.57924453395993791).epsilon(1e-12));
  CHECK_THROWS_AS(nd::cross_entropy({0.5, 0.5}, {1.0, 0.0, 0.0}),
                  cmd::InvalidInput);
}

TEST_CASE("Gibbs inequality within guard slack") {
  Rng rng(79);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = 2 + rng.uniform_below(10);
    std::vector<double> q = random_dist(rng, n);
    std::vector<double> p = random_dist(rng, n);
    CHECK(nd::cross_entropy(q, p) >= nd::entropy(q) - 1e-4);
  }
}

TEST_CASE("kl_divergence identity, sign, and oracle value") {
  std::vector<double> p = {0.3, 0.45, 0.25};
  CHECK(nd::kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-9));

  std::vector<double> onehot = {1.0, 0.0, 0.0, 0.0};
  std::vector<double> u4(4, 0.25);
  CHECK(nd::kl_divergence(u4, onehot) > 1.0);

  CHECK(nd::kl_divergence({0.5, 0.5}, {0.9, 0.1}) ==
        doctest::Approx(0.51082206823374365).epsilon(1e-12));
  CHECK(nd::kl_divergence({0.5, 0.5}, {0.9, 0.1}) ==
        doctest::Approx(0.51083).epsilon(1e-3));
  CHECK_THROWS_AS(nd::kl_divergence({0.5, 0.5}, {1.0, 0.0, 0.0}),
                  cmd::InvalidInput);

  Rng rng(80);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = 2 + rng.uniform_below(10);
    CHECK(nd::kl_divergence(random_dist(rng, n), random_dist(rng, n)) >= -1e-4);
  }
}

TEST_CASE("softmax_rows matches per-row softmax") {
  Rng rng(81);
  Matrix logits(5, 7);
  for (double& v : logits.data) v = rng.uniform(-4.0, 4.0);
  Matrix probs = nd::softmax_rows(logits);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    std::vector<double> row(logits.row(i), logits.row(i) + logits.cols);
    std::vector<double> expected = nd::softmax(row);
    for (std::size_t j = 0; j < logits.cols; ++j)
      CHECK(probs.at(i, j) == expected[j]);
  }
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  CHECK(nd::argmax({0.2, 0.5, 0.3}) == 1);
  CHECK(nd::argmax({0.4, 0.4, 0.2}) == 0);
  CHECK(nd::argmax({0.1}) == 0);
  CHECK_THROWS_AS(nd::argmax(std::vector<double>{}), cmd::InvalidInput);
}
