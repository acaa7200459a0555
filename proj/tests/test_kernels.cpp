#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "loco/kernels.hpp"

using loco::kernels::KernelTable;

namespace {

std::vector<double> rand_vec(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                             double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Lengths straddling the vector width and its remainders.
const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 32, 33, 100};

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

}  // namespace

TEST_CASE("scalar table is always available and active() resolves") {
  CHECK(loco::kernels::scalar().name == "scalar");
  const KernelTable& act = loco::kernels::active();
  CHECK((act.name == "scalar" || act.name == "avx2"));
}

TEST_CASE("scalar forward step matches the recursion by hand") {
  const auto& k = loco::kernels::scalar();
  const double prev[3] = {0.5, 0.3, 0.2};
  double next[3];
  k.pbd_forward_step(prev, next, 3, 0.4);
  CHECK(next[0] == doctest::Approx(0.3));
  CHECK(next[1] == doctest::Approx(0.6 * 0.3 + 0.4 * 0.5));
  CHECK(next[2] == doctest::Approx(0.2 + 0.4 * 0.3));
}

TEST_CASE("vector kernels agree with the scalar reference") {
  const KernelTable* v = loco::kernels::avx2();
  if (v == nullptr) {
    MESSAGE("no AVX2 on this machine; equivalence not exercised");
    return;
  }
  const KernelTable& s = loco::kernels::scalar();
  std::mt19937_64 rng(17);

  for (std::size_t n : kSizes) {
    CAPTURE(n);
    SUBCASE("elementwise kernels are bit-identical") {
      if (n >= 2) {
        const auto prev = rand_vec(rng, n, 0.0, 1.0);
        std::vector<double> a(n), b(n);
        s.pbd_forward_step(prev.data(), a.data(), n, 0.37);
        v->pbd_forward_step(prev.data(), b.data(), n, 0.37);
        CHECK(a == b);
      }
      const auto x = rand_vec(rng, n);
      auto y1 = rand_vec(rng, n);
      auto y2 = y1;
      s.axpy(0.3, x.data(), y1.data(), n);
      v->axpy(0.3, x.data(), y2.data(), n);
      CHECK(y1 == y2);

      const std::size_t rows = 3;
      const auto yr = rand_vec(rng, rows);
      auto g1 = rand_vec(rng, rows * n);
      auto g2 = g1;
      s.ger(g1.data(), yr.data(), x.data(), rows, n);
      v->ger(g2.data(), yr.data(), x.data(), rows, n);
      CHECK(g1 == g2);

      // gemv_t with n rows and 5 columns
      const auto w = rand_vec(rng, n * 5);
      auto xt1 = rand_vec(rng, 5);
      auto xt2 = xt1;
      s.gemv_t(w.data(), x.data(), xt1.data(), n, 5);
      v->gemv_t(w.data(), x.data(), xt2.data(), n, 5);
      CHECK(xt1 == xt2);

      auto p1 = rand_vec(rng, n), m1 = rand_vec(rng, n), v1 = rand_vec(rng, n, 0.0, 1.0);
      auto p2 = p1, m2 = m1, v2 = v1;
      const auto grad = rand_vec(rng, n);
      const loco::kernels::AdamCoeffs c{1e-3, 0.9, 0.999, 1e-8, 1 - 0.9 * 0.9, 1 - 0.999 * 0.999};
      s.adam_update(p1.data(), grad.data(), m1.data(), v1.data(), n, c);
      v->adam_update(p2.data(), grad.data(), m2.data(), v2.data(), n, c);
      CHECK(p1 == p2);
      CHECK(m1 == m2);
      CHECK(v1 == v2);
    }
    SUBCASE("reductions agree within rounding") {
      const auto a = rand_vec(rng, n), b = rand_vec(rng, n);
      CHECK(rel(s.dot(a.data(), b.data(), n), v->dot(a.data(), b.data(), n)) <= 1e-14);

      const auto w = rand_vec(rng, 6 * n);
      auto y1 = rand_vec(rng, 6);
      auto y2 = y1;
      s.gemv(w.data(), a.data(), y1.data(), 6, n);
      v->gemv(w.data(), a.data(), y2.data(), 6, n);
      for (std::size_t i = 0; i < 6; ++i) CHECK(rel(y1[i], y2[i]) <= 1e-14);

      if (n >= 2) {
        const auto prev = rand_vec(rng, n, 0.0, 1.0), gnext = rand_vec(rng, n);
        std::vector<double> gp1(n), gp2(n);
        const double dp1 = s.pbd_backward_step(prev.data(), gnext.data(), gp1.data(), n, 0.41);
        const double dp2 = v->pbd_backward_step(prev.data(), gnext.data(), gp2.data(), n, 0.41);
        CHECK(gp1 == gp2);
        CHECK(rel(dp1, dp2) <= 1e-14);
      }
    }
  }
}

TEST_CASE("set_active switches the dispatch table") {
  const KernelTable& before = loco::kernels::active();
  loco::kernels::set_active(loco::kernels::scalar());
  CHECK(loco::kernels::active().name == "scalar");
  loco::kernels::set_active(before);
}
