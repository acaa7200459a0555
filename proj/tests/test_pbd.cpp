#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "loco/error.hpp"
#include "loco/pbd.hpp"

namespace pbd = loco::pbd;
using V = std::vector<double>;

namespace {

void check_masses(const pbd::CountDistribution& d, const V& want, double tol = 1e-12) {
  REQUIRE(d.masses.size() == want.size());
  for (std::size_t k = 0; k < want.size(); ++k) {
    CAPTURE(k);
    CHECK(std::abs(d.masses[k] - want[k]) <= tol);
  }
}

V random_probs(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  V p(n);
  for (double& x : p) x = u(rng);
  return p;
}

}  // namespace

TEST_CASE("pmf worked examples") {
  check_masses(pbd::pmf(V{0, 0, 0}, 3), {1, 0, 0, 0});
  check_masses(pbd::pmf(V{0.1, 0.2, 0.3}, 3), {0.504, 0.398, 0.092, 0.006});
  const auto folded = pbd::pmf(V{0.6, 0.7}, 1);
  check_masses(folded, {0.12, 0.88});
  CHECK(folded.truncated_tail);
  CHECK_FALSE(pbd::pmf(V{0.6, 0.7}, 2).truncated_tail);
}

TEST_CASE("k_max beyond the length means untruncated") {
  const auto d = pbd::pmf(V{0.6, 0.7}, 50);
  check_masses(d, {0.12, 0.46, 0.42});
  CHECK(d.k_max == 2);
  CHECK_FALSE(d.truncated_tail);
}

TEST_CASE("pmf rejects bad input") {
  CHECK_THROWS_AS(pbd::pmf(V{}, 3), loco::InvalidInput);
  CHECK_THROWS_AS(pbd::pmf(V{0.5, 1.5}, 3), loco::InvalidInput);
  CHECK_THROWS_AS(pbd::pmf(V{-0.1}, 3), loco::InvalidInput);
  CHECK_THROWS_AS(pbd::pmf(V{std::nan("")}, 3), loco::InvalidInput);
  CHECK_THROWS_AS(pbd::pmf(V{0.5}, 0), loco::InvalidInput);
  CHECK_THROWS_AS(pbd::nll(V{0.5}, -1, 3), loco::InvalidInput);
}

TEST_CASE("brute-force oracle examples") {
  check_masses(pbd::pmf_bruteforce(V{0.5, 0.5}), {0.25, 0.5, 0.25});
  check_masses(pbd::pmf_bruteforce(V{1.0}), {0, 1});
  check_masses(pbd::pmf_bruteforce(V{0.1, 0.2, 0.3}), {0.504, 0.398, 0.092, 0.006});
  CHECK_THROWS_AS(pbd::pmf_bruteforce(V(21, 0.5)), loco::SizeError);
  CHECK_NOTHROW(pbd::pmf_bruteforce(V(20, 0.5)));
}

TEST_CASE("nll worked examples") {
  CHECK(pbd::nll(V{0, 0, 0}, 0, 3) == 0.0);
  CHECK(pbd::nll(V{0.1, 0.2, 0.3}, 1, 3) == doctest::Approx(0.9213032736976993).epsilon(1e-12));
  CHECK(pbd::nll(V{0.5}, 1, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("labels above k_max land in the tail bin") {
  const V p{0.6, 0.7, 0.2};
  const double tail = pbd::pmf(p, 1).masses[1];
  CHECK(pbd::nll(p, 3, 1) == doctest::Approx(-std::log(tail)).epsilon(1e-14));
  CHECK(pbd::nll(p, 7, 1) == pbd::nll(p, 1, 1));
}

TEST_CASE("impossible labels are floored and carry no gradient") {
  const V p{0, 0};
  CHECK(pbd::nll(p, 2, 2) == doctest::Approx(-std::log(pbd::kEpsMass)));
  for (double g : pbd::nll_grad(p, 2, 2)) CHECK(g == 0.0);
}

TEST_CASE("nll_grad worked examples") {
  for (double g : pbd::nll_grad(V{0.5, 0.5}, 1, 2)) CHECK(std::abs(g) <= 1e-15);
  const V g0 = pbd::nll_grad(V{0.1, 0.2, 0.3}, 0, 3);
  CHECK(g0[0] == doctest::Approx(1 / 0.9).epsilon(1e-12));
  CHECK(g0[1] == doctest::Approx(1 / 0.8).epsilon(1e-12));
  CHECK(g0[2] == doctest::Approx(1 / 0.7).epsilon(1e-12));
  const auto both = pbd::nll_and_grad(V{0.1, 0.2, 0.3}, 0, 3);
  CHECK(both.grad == g0);
  CHECK(both.value == pbd::nll(V{0.1, 0.2, 0.3}, 0, 3));
}

TEST_CASE("grad_oracle worked examples") {
  const V one = pbd::grad_oracle(V{1.0}, 1);
  CHECK(one[0] == doctest::Approx(-1.0));
  for (double g : pbd::grad_oracle(V{0.5, 0.5}, 1)) CHECK(std::abs(g) <= 1e-15);
  const V g0 = pbd::grad_oracle(V{0.1, 0.2, 0.3}, 0);
  CHECK(g0[0] == doctest::Approx(1 / 0.9).epsilon(1e-12));
  CHECK(g0[2] == doctest::Approx(1 / 0.7).epsilon(1e-12));
}

TEST_CASE("gradient of a random T=8 sequence matches central differences") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  V p(8);
  for (double& x : p) x = u(rng);
  const V g = pbd::nll_grad(p, 2, 8);
  const double h = 1e-6;
  for (std::size_t t = 0; t < p.size(); ++t) {
    V up = p, down = p;
    up[t] += h;
    down[t] -= h;
    const double fd = (pbd::nll(up, 2, 8) - pbd::nll(down, 2, 8)) / (2 * h);
    CHECK(std::abs(g[t] - fd) / std::max({std::abs(g[t]), std::abs(fd), 1e-3}) <= 1e-5);
  }
}

TEST_CASE("truncated gradient equals the gradient of the folded PMF") {
  std::mt19937_64 rng(3);
  const V p = random_probs(rng, 30);
  const std::size_t k_max = 4;
  const V g = pbd::nll_grad(p, 9, k_max);
  const double h = 1e-6;
  for (std::size_t t = 0; t < p.size(); t += 7) {
    V up = p, down = p;
    up[t] = std::min(1.0, p[t] + h);
    down[t] = std::max(0.0, p[t] - h);
    const double fd = (pbd::nll(up, 9, k_max) - pbd::nll(down, 9, k_max)) / (up[t] - down[t]);
    CHECK(g[t] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("diagnostics worked examples") {
  const auto r = pbd::diagnostics(V{0.3, 0.4});
  REQUIRE(r.running_max.size() == 2);
  CHECK(r.running_max[0] == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(r.running_max[1] == doctest::Approx(0.46).epsilon(1e-14));
  CHECK(r.variance_series[0] == doctest::Approx(0.21).epsilon(1e-14));
  CHECK(r.variance_series[1] == doctest::Approx(0.45).epsilon(1e-14));

  const auto half = pbd::diagnostics(V{0.5});
  CHECK(half.first_upper_bound == 0.5);
  CHECK(half.running_max[0] == 0.5);

  const auto sparse = pbd::diagnostics(V(100, 0.01));
  CHECK(std::abs(sparse.lecam_bound - (std::exp(-1.0) + 0.02)) <= 1e-9);
  CHECK(sparse.running_max.back() <= sparse.lecam_bound);
}

TEST_CASE("large sequences stay normalized") {
  std::mt19937_64 rng(11);
  const V p = random_probs(rng, 2000);
  for (std::size_t k : {std::size_t{31}, std::size_t{2000}}) {
    const auto d = pbd::pmf(p, k);
    const double s = std::accumulate(d.masses.begin(), d.masses.end(), 0.0);
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}
