#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cmd/error.hpp"
#include "cmd/kernels.hpp"
#include "cmd/rng.hpp"

using cmd::Rng;
namespace kern = cmd::kern;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0,
                               double hi = 2.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b,
                 double tol = 1e-12) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1.0});
    CHECK(std::abs(a[i] - b[i]) <= tol * scale);
  }
}

std::vector<kern::Isa> available_isas() {
  std::vector<kern::Isa> isas = {kern::Isa::Scalar};
  if (kern::best_isa() != kern::Isa::Scalar) isas.push_back(kern::best_isa());
  return isas;
}

}  // namespace

TEST_CASE("isa plumbing") {
  CHECK(kern::isa_name(kern::Isa::Scalar) == "scalar");
  CHECK(kern::isa_name(kern::Isa::Avx2) == "avx2");
  CHECK(kern::isa_name(kern::Isa::Neon) == "neon");

  kern::Isa before = kern::active_isa();
  kern::set_active_isa(kern::Isa::Scalar);
  CHECK(kern::active_isa() == kern::Isa::Scalar);
  kern::set_active_isa(before);

#if !defined(__aarch64__)
  CHECK_THROWS_AS(kern::set_active_isa(kern::Isa::Neon), cmd::InvalidInput);
#endif
}

TEST_CASE("elementwise kernels agree with scalar reference") {
  const auto& ref = kern::ops_for(kern::Isa::Scalar);
  Rng rng(7);
  for (kern::Isa isa : available_isas()) {
    const auto& k = kern::ops_for(isa);
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 13u, 32u, 33u, 257u}) {
      std::vector<double> a = random_vec(rng, n);
      std::vector<double> b = random_vec(rng, n);

      CHECK(std::abs(k.dot(a.data(), b.data(), n) -
                     ref.dot(a.data(), b.data(), n)) <= 1e-12 * n);
      CHECK(std::abs(k.sum(a.data(), n) - ref.sum(a.data(), n)) <= 1e-12 * n);
      CHECK(k.max_value(a.data(), n) == ref.max_value(a.data(), n));

      std::vector<double> y1 = b, y2 = b;
      k.axpy(0.37, a.data(), y1.data(), n);
      ref.axpy(0.37, a.data(), y2.data(), n);
      check_close(y1, y2);

      std::vector<double> s1 = a, s2 = a;
      k.scale(s1.data(), -1.25, n);
      ref.scale(s2.data(), -1.25, n);
      check_close(s1, s2);

      std::vector<double> r1(n), r2(n);
      k.relu(a.data(), r1.data(), n);
      ref.relu(a.data(), r2.data(), n);
      check_close(r1, r2);

      std::vector<double> g1 = b, g2 = b;
      k.relu_mask(a.data(), g1.data(), n);
      ref.relu_mask(a.data(), g2.data(), n);
      check_close(g1, g2);

      std::vector<double> p1 = a, p2 = a, v1 = b, v2 = b;
      std::vector<double> g = random_vec(rng, n);
      k.sgd_update(p1.data(), v1.data(), g.data(), 0.1, 0.9, 5e-4, n);
      ref.sgd_update(p2.data(), v2.data(), g.data(), 0.1, 0.9, 5e-4, n);
      check_close(p1, p2);
      check_close(v1, v2);
    }
  }
}

TEST_CASE("matrix kernels agree with scalar reference") {
  const auto& ref = kern::ops_for(kern::Isa::Scalar);
  Rng rng(11);
  struct Dims {
    std::size_t m, k, n;
  };
  for (kern::Isa isa : available_isas()) {
    const auto& kop = kern::ops_for(isa);
    for (Dims d : {Dims{1, 1, 1}, Dims{2, 3, 4}, Dims{5, 8, 3}, Dims{7, 13, 9},
                   Dims{16, 33, 10}}) {
      std::vector<double> a = random_vec(rng, d.m * d.k);
      std::vector<double> bt = random_vec(rng, d.n * d.k);
      std::vector<double> b = random_vec(rng, d.k * d.n);

      std::vector<double> c1(d.m * d.n), c2(d.m * d.n);
      kop.matmul_nt(a.data(), bt.data(), c1.data(), d.m, d.k, d.n);
      ref.matmul_nt(a.data(), bt.data(), c2.data(), d.m, d.k, d.n);
      check_close(c1, c2);

      kop.matmul_nn(a.data(), b.data(), c1.data(), d.m, d.k, d.n);
      ref.matmul_nn(a.data(), b.data(), c2.data(), d.m, d.k, d.n);
      check_close(c1, c2);

      std::vector<double> acc1 = random_vec(rng, d.k * d.n);
      std::vector<double> acc2 = acc1;
      std::vector<double> rows = random_vec(rng, d.m * d.n);
      kop.matmul_tn_acc(a.data(), rows.data(), acc1.data(), d.m, d.k, d.n);
      ref.matmul_tn_acc(a.data(), rows.data(), acc2.data(), d.m, d.k, d.n);
      check_close(acc1, acc2);

      std::vector<double> cs1(d.n), cs2(d.n);
      kop.col_sums(rows.data(), cs1.data(), d.m, d.n);
      ref.col_sums(rows.data(), cs2.data(), d.m, d.n);
      check_close(cs1, cs2);
    }
  }
}

TEST_CASE("sgd_update semantics") {
  const auto& k = kern::ops();
  double p = 0.0, v = 0.0, g = 1.0;
  k.sgd_update(&p, &v, &g, 0.1, 0.9, 0.0, 1);
  CHECK(p == doctest::Approx(-0.1).epsilon(1e-12));
  k.sgd_update(&p, &v, &g, 0.1, 0.9, 0.0, 1);
  CHECK(p == doctest::Approx(-0.29).epsilon(1e-12));
}
