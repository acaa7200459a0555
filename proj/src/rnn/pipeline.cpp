#include <algorithm>
#include <cmath>

#include "loco/error.hpp"
#include "loco/loss.hpp"
#include "loco/rnn.hpp"

namespace loco::rnn {

void check_output(const Matrix& probs) {
  for (std::size_t i = 0; i < probs.data.size(); ++i) {
    if (!std::isfinite(probs.data[i])) {
      throw TrainingDiverged("model output is not finite", "output", i, probs.data[i]);
    }
  }
}

SampleGradient loss_and_grad(const ModelParams& params, const Matrix& x,
                             const loss::CountLabel& label, std::size_t k_max, double eps_p) {
  ForwardResult fwd = forward(params, x);
  check_output(fwd.probs);
  const Matrix clamped = loss::clamp_probs(fwd.probs, eps_p);
  loss::BatchLoss bl = loss::batch_nll(std::span<const Matrix>(&clamped, 1),
                                       std::span<const loss::CountLabel>(&label, 1), k_max, true);
  Matrix& dprob = bl.grads.front();
  loss::clamp_backward(fwd.probs, eps_p, dprob);

  SampleGradient out;
  out.loss = bl.report.total;
  out.grads = backward(params, fwd.cache, dprob);
  out.probs = std::move(fwd.probs);
  return out;
}

double loss_only(const ModelParams& params, const Matrix& x, const loss::CountLabel& label,
                 std::size_t k_max, double eps_p) {
  const Matrix probs = predict(params, x);
  check_output(probs);
  const Matrix clamped = loss::clamp_probs(probs, eps_p);
  return loss::batch_nll(std::span<const Matrix>(&clamped, 1),
                         std::span<const loss::CountLabel>(&label, 1), k_max)
      .report.total;
}

GradCheckReport grad_check(const ModelParams& params, const Matrix& x,
                           const loss::CountLabel& label, double h, std::size_t k_max,
                           double eps_p) {
  const Gradients analytic = loss_and_grad(params, x, label, k_max, eps_p).grads;
  ModelParams probe = params;
  GradCheckReport report;
  const auto values = probe.values();
  for (const TensorInfo& ti : params.layout()) {
    for (std::size_t j = 0; j < ti.size(); ++j) {
      const std::size_t i = ti.offset + j;
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss_only(probe, x, label, k_max, eps_p);
      values[i] = saved - h;
      const double down = loss_only(probe, x, label, k_max, eps_p);
      values[i] = saved;

      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.values()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      const double err = std::abs(a - numeric) / denom;
      if (report.worst_tensor.empty() || err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_tensor = std::string(ti.name);
        report.worst_index = j;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace loco::rnn
