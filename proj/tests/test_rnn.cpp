#include <doctest.h>

#include <cmath>
#include <random>

#include "loco/error.hpp"
#include "loco/loss.hpp"
#include "loco/rnn.hpp"

using loco::Matrix;
namespace rnn = loco::rnn;

namespace {

Matrix random_input(std::size_t steps, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix x(steps, dim);
  for (double& v : x.data) v = n(rng);
  return x;
}

rnn::ModelParams random_model(rnn::ModelDims dims, std::uint64_t seed, double scale = 0.5) {
  rnn::ModelParams p(dims);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : p.values()) v = u(rng);
  return p;
}

}  // namespace

TEST_CASE("layout covers the flat buffer with named tensors") {
  const rnn::ModelParams p({3, 4, 2});
  std::size_t total = 0;
  for (const auto& info : p.layout()) {
    CHECK(info.offset == total);
    total += info.size();
  }
  CHECK(total == p.size());
  CHECK(p.info(rnn::Tensor::kHeadWeight).rows == 2);
  CHECK(p.info(rnn::Tensor::kHeadWeight).cols == 4);
  CHECK(p.info(rnn::Tensor::kUpdateRecurrent).name == "gru.update.recurrent");
}

TEST_CASE("zero weights give sigmoid of the head bias everywhere") {
  rnn::ModelParams p({3, 4, 2});
  auto b = p.tensor(rnn::Tensor::kHeadBias);
  b[0] = 0.7;
  b[1] = -1.3;
  const Matrix probs = rnn::predict(p, random_input(6, 3, 1));
  for (std::size_t t = 0; t < 6; ++t) {
    CHECK(probs(t, 0) == 1.0 / (1.0 + std::exp(-0.7)));
    CHECK(probs(t, 1) == 1.0 / (1.0 + std::exp(1.3)));
  }
}

TEST_CASE("init_params places omega on the zero bin") {
  const auto p = rnn::init_params({8, 6, 2}, {5, 0.5, 300});
  const Matrix probs = rnn::predict(p, random_input(300, 8, 2));
  for (std::size_t c = 0; c < 2; ++c) {
    double log_zero = 0.0;
    for (std::size_t t = 0; t < probs.rows; ++t) log_zero += std::log1p(-probs(t, c));
    CHECK(std::exp(log_zero) == doctest::Approx(0.5).epsilon(1e-9));
  }
  CHECK(p == rnn::init_params({8, 6, 2}, {5, 0.5, 300}));
  CHECK_FALSE(p == rnn::init_params({8, 6, 2}, {6, 0.5, 300}));
}

TEST_CASE("outputs before a perturbed step are untouched") {
  const auto p = random_model({3, 5, 2}, 9);
  const Matrix x = random_input(20, 3, 4);
  const Matrix base = rnn::predict(p, x);
  for (std::size_t t0 : {0u, 7u, 19u}) {
    Matrix y = x;
    for (std::size_t t = t0; t < 20; ++t) y(t, 1) += 3.0;
    const Matrix moved = rnn::predict(p, y);
    for (std::size_t t = 0; t < t0; ++t) {
      CHECK(moved(t, 0) == base(t, 0));
      CHECK(moved(t, 1) == base(t, 1));
    }
    CHECK(moved(t0, 0) != base(t0, 0));
  }
}

TEST_CASE("forward is deterministic") {
  const auto p = random_model({3, 5, 2}, 9);
  const Matrix x = random_input(30, 3, 4);
  CHECK(rnn::predict(p, x) == rnn::predict(p, x));
  CHECK(rnn::forward(p, x).probs == rnn::predict(p, x));
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
  const auto p = random_model({3, 4, 1}, 2);
  const auto fr = rnn::forward(p, random_input(5, 3, 3));
  const auto g = rnn::backward(p, fr.cache, Matrix(5, 1));
  for (double v : g.values()) CHECK(v == 0.0);
}

TEST_CASE("backward rejects a foreign cache") {
  const auto p = random_model({3, 4, 1}, 2);
  const auto fr = rnn::forward(p, random_input(5, 3, 3));
  const auto other = random_model({3, 5, 1}, 2);
  CHECK_THROWS_AS(rnn::backward(other, fr.cache, Matrix(5, 1)), loco::InvalidState);
  CHECK_THROWS_AS(rnn::backward(p, fr.cache, Matrix(4, 1)), loco::InvalidState);
}

TEST_CASE("pipeline gradient matches central differences") {
  const loco::loss::CountLabel label{{2}};
  SUBCASE("tiny random model") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      CAPTURE(seed);
      const auto p = random_model({3, 4, 1}, seed);
      const auto rep = rnn::grad_check(p, random_input(5, 3, 100 + seed), label, 1e-5);
      CHECK(rep.max_rel_error <= 1e-5);
    }
  }
  SUBCASE("zero-weight model") {
    rnn::ModelParams p({3, 4, 1});
    p.tensor(rnn::Tensor::kHeadBias)[0] = -1.0;
    const auto rep = rnn::grad_check(p, random_input(5, 3, 7), label, 1e-5);
    CHECK(rep.max_rel_error <= 1e-7);
  }
  SUBCASE("two channels with truncation") {
    const auto p = random_model({3, 4, 2}, 21);
    const loco::loss::CountLabel two{{3, 1}};
    const auto rep = rnn::grad_check(p, random_input(9, 3, 5), two, 1e-5, 2);
    CHECK(rep.max_rel_error <= 1e-5);
  }
  SUBCASE("a coarse step is reported, not thrown") {
    const auto p = random_model({3, 4, 1}, 1);
    rnn::GradCheckReport rep;
    CHECK_NOTHROW(rep = rnn::grad_check(p, random_input(5, 3, 1), label, 1e-1));
    CHECK(rep.max_rel_error > 0.0);
    CHECK_FALSE(rep.worst_tensor.empty());
  }
}

TEST_CASE("two-sample batch gradient is the mean of per-sample gradients") {
  const auto p = random_model({3, 4, 1}, 5);
  const Matrix xa = random_input(6, 3, 1), xb = random_input(9, 3, 2);
  const loco::loss::CountLabel ya{{1}}, yb{{3}};
  const auto ga = rnn::loss_and_grad(p, xa, ya, 31, 1e-6);
  const auto gb = rnn::loss_and_grad(p, xb, yb, 31, 1e-6);

  // batch objective = mean of the two losses; check it against differences
  const double h = 1e-6;
  rnn::ModelParams q = p;
  for (std::size_t i = 0; i < p.size(); i += 5) {
    const double saved = q.values()[i];
    q.values()[i] = saved + h;
    const double up = 0.5 * (rnn::loss_only(q, xa, ya, 31, 1e-6) + rnn::loss_only(q, xb, yb, 31, 1e-6));
    q.values()[i] = saved - h;
    const double dn = 0.5 * (rnn::loss_only(q, xa, ya, 31, 1e-6) + rnn::loss_only(q, xb, yb, 31, 1e-6));
    q.values()[i] = saved;
    const double mean = 0.5 * (ga.grads.values()[i] + gb.grads.values()[i]);
    CHECK(std::abs(mean - (up - dn) / (2 * h)) <= 1e-6 * std::max(1.0, std::abs(mean)));
  }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  auto p = random_model({2, 3, 1}, 1);
  const auto before = p;
  auto st = rnn::make_adam(p, {});
  rnn::adam_step(p, rnn::Gradients(p.dims()), st);
  CHECK(p == before);
  CHECK(st.step == 1);
}

TEST_CASE("adam: first step moves by about lr, repeated steps approach lr") {
  rnn::ModelParams p({1, 1, 1});
  auto st = rnn::make_adam(p, {1e-3, 0.9, 0.999, 1e-8});
  rnn::Gradients g(p.dims());
  g.values()[0] = 0.37;
  const double prev = p.values()[0];
  rnn::adam_step(p, g, st);
  const double first = prev - p.values()[0];
  CHECK(first == doctest::Approx(1e-3).epsilon(1e-6));

  // with a constant gradient the bias-corrected moments are g and g^2
  for (int i = 0; i < 50; ++i) {
    const double x0 = p.values()[0];
    rnn::adam_step(p, g, st);
    const double step = x0 - p.values()[0];
    CHECK(step == doctest::Approx(1e-3).epsilon(1e-6));
    CHECK(step <= 1e-3 * (1 + 1e-12));
  }
}

TEST_CASE("adam refuses non-finite gradients and leaves state intact") {
  auto p = random_model({2, 3, 1}, 1);
  const auto before = p;
  auto st = rnn::make_adam(p, {});
  rnn::Gradients g(p.dims());
  const auto& info = p.info(rnn::Tensor::kResetBias);
  g.values()[info.offset + 1] = std::nan("");
  try {
    rnn::adam_step(p, g, st);
    FAIL("expected TrainingDiverged");
  } catch (const loco::TrainingDiverged& e) {
    CHECK(e.tensor() == "gru.reset.bias");
    CHECK(e.index() == 1);
  }
  CHECK(p == before);
  CHECK(st.step == 0);
}

TEST_CASE("clip_grad_norm") {
  rnn::Gradients g({1, 1, 1});
  for (double& v : g.values()) v = 0.0;
  g.values()[0] = 3.0;
  g.values()[1] = 4.0;
  CHECK(rnn::clip_grad_norm(g, 1.0) == doctest::Approx(5.0));
  CHECK(g.values()[0] == doctest::Approx(0.6));
  CHECK(g.values()[1] == doctest::Approx(0.8));
  CHECK(rnn::clip_grad_norm(g, 10.0) == doctest::Approx(1.0));
  CHECK(g.values()[0] == doctest::Approx(0.6));
}
