#include <doctest.h>

#include <cmath>
#include <vector>

#include "loco/error.hpp"
#include "loco/loss.hpp"
#include "loco/pbd.hpp"

using loco::Matrix;
namespace loss = loco::loss;

namespace {

Matrix columns(const std::vector<std::vector<double>>& cols) {
  Matrix m(cols.front().size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t t = 0; t < m.rows; ++t) m(t, c) = cols[c][t];
  }
  return m;
}

}  // namespace

TEST_CASE("batch_nll worked examples") {
  {
    const Matrix p = columns({{0, 0, 0}});
    const loss::CountLabel y{{0}};
    CHECK(loss::batch_nll({&p, 1}, {&y, 1}, 31).report.total == 0.0);
  }
  const Matrix p = columns({{0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}});
  const loss::CountLabel y{{1, 0}};
  const auto one = loss::batch_nll({&p, 1}, {&y, 1}, 31).report;
  CHECK(one.total == doctest::Approx(1.6064822846084676).epsilon(1e-12));
  REQUIRE(one.per_channel.size() == 2);
  CHECK(one.per_channel[0] == doctest::Approx(0.9213032736976993).epsilon(1e-12));
  CHECK(one.per_channel[1] == doctest::Approx(0.6851790109107684).epsilon(1e-12));

  const std::vector<Matrix> two{p, p};
  const std::vector<loss::CountLabel> labels{y, y};
  CHECK(loss::batch_nll(two, labels, 31).report.total == doctest::Approx(one.total).epsilon(1e-15));
}

TEST_CASE("batch gradient is the mean of per-sample gradients") {
  const Matrix a = columns({{0.2, 0.7, 0.4, 0.1}});
  const Matrix b = columns({{0.5, 0.3}});
  const loss::CountLabel ya{{2}}, yb{{1}};
  const std::vector<Matrix> both{a, b};
  const std::vector<loss::CountLabel> labels{ya, yb};
  const auto bl = loss::batch_nll(both, labels, 31, true);
  REQUIRE(bl.grads.size() == 2);
  const auto ga = loco::pbd::nll_grad(a.data, 2, 31);
  const auto gb = loco::pbd::nll_grad(b.data, 1, 31);
  for (std::size_t t = 0; t < 4; ++t) CHECK(std::abs(bl.grads[0].data[t] - ga[t] / 2) <= 1e-15);
  for (std::size_t t = 0; t < 2; ++t) CHECK(std::abs(bl.grads[1].data[t] - gb[t] / 2) <= 1e-15);
  CHECK(loss::batch_nll(both, labels, 31).grads.empty());
}

TEST_CASE("batch_nll rejects mismatched shapes") {
  const Matrix p = columns({{0.1, 0.2}});
  const loss::CountLabel wrong{{1, 2}};
  CHECK_THROWS_AS(loss::batch_nll({&p, 1}, {&wrong, 1}, 31), loco::InvalidInput);
  const std::vector<loss::CountLabel> two{{{1}}, {{1}}};
  CHECK_THROWS_AS(loss::batch_nll({&p, 1}, two, 31), loco::InvalidInput);
}

TEST_CASE("init_bias worked examples") {
  CHECK(loss::init_bias(0.5, 1) == doctest::Approx(0.0));
  CHECK(loss::init_bias(0.5, 2) == doctest::Approx(-0.8813735870195432).epsilon(1e-12));
  const double b = loss::init_bias(0.5, 100);
  CHECK(b == doctest::Approx(-4.9682153687802035).epsilon(1e-12));
  const std::vector<double> p(100, 1.0 / (1.0 + std::exp(-b)));
  CHECK(std::abs(loco::pbd::pmf(p, 31).masses[0] - 0.5) <= 1e-9);
  CHECK_THROWS_AS(loss::init_bias(0.0, 10), loco::InvalidInput);
  CHECK_THROWS_AS(loss::init_bias(1.0, 10), loco::InvalidInput);
  CHECK_THROWS_AS(loss::init_bias(0.5, 0), loco::InvalidInput);
}

TEST_CASE("clamp_probs worked examples") {
  const auto c = loss::clamp_probs(std::vector<double>{0, 0.5, 1}, 1e-6);
  CHECK(c == std::vector<double>{1e-6, 0.5, 1 - 1e-6});
  CHECK(loss::clamp_probs(std::vector<double>{0.3}, 1e-6) == std::vector<double>{0.3});
  const std::vector<double> raw{0, 1, 0.25};
  CHECK(loss::clamp_probs(raw, 0.0) == raw);
  CHECK_THROWS_AS(loss::clamp_probs(raw, 0.1), loco::InvalidInput);
  CHECK_THROWS_AS(loss::clamp_probs(raw, -1e-3), loco::InvalidInput);
}

TEST_CASE("clamp_backward zeroes clamped entries only") {
  Matrix raw = columns({{0.0, 0.5, 1.0}});
  Matrix g = columns({{3.0, 4.0, 5.0}});
  loss::clamp_backward(raw, 1e-6, g);
  CHECK(g.data == std::vector<double>{0.0, 4.0, 0.0});
}
