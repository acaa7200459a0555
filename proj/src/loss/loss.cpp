#include "loco/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loco/error.hpp"
#include "loco/pbd.hpp"

namespace loco::loss {

BatchLoss batch_nll(std::span<const Matrix> probs, std::span<const CountLabel> labels,
                    std::size_t k_max, bool with_grad) {
  if (probs.empty()) throw InvalidInput("batch is empty");
  if (probs.size() != labels.size()) {
    throw InvalidInput("batch has " + std::to_string(probs.size()) + " probability matrices but " +
                       std::to_string(labels.size()) + " labels");
  }
  const std::size_t channels = probs.front().cols;
  if (channels == 0) throw InvalidInput("probability matrices have no channels");

  const std::size_t n = probs.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  BatchLoss out;
  out.report.per_sample.assign(n, 0.0);
  out.report.per_channel.assign(channels, 0.0);
  if (with_grad) out.grads.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& p = probs[i];
    if (p.cols != channels || labels[i].counts.size() != channels) {
      throw InvalidInput("sample " + std::to_string(i) + " does not have " +
                         std::to_string(channels) + " channels");
    }
    if (with_grad) out.grads[i] = Matrix(p.rows, channels);
    for (std::size_t c = 0; c < channels; ++c) {
      const std::vector<double> seq = p.column(c);
      const pbd::NllWithGrad r = pbd::nll_and_grad(seq, labels[i].counts[c], k_max);
      out.report.per_sample[i] += r.value;
      out.report.per_channel[c] += r.value;
      if (with_grad) {
        for (std::size_t t = 0; t < p.rows; ++t) out.grads[i](t, c) = r.grad[t] * inv_n;
      }
    }
  }

  double total = 0.0;
  for (double v : out.report.per_sample) total += v;
  out.report.total = total * inv_n;
  for (double& v : out.report.per_channel) v *= inv_n;
  return out;
}

double init_bias(double omega, std::size_t length) {
  if (!(omega > 0.0 && omega < 1.0)) throw InvalidInput("omega must lie in (0,1)");
  if (length == 0) throw InvalidInput("sequence length must be at least 1");
  const double root = std::pow(omega, 1.0 / static_cast<double>(length));
  return std::log((1.0 - root) / root);
}

namespace {

void check_eps(double eps_p) {
  if (!(eps_p >= 0.0 && eps_p < 0.1)) throw InvalidInput("eps_p must lie in [0, 0.1)");
}

}  // namespace

std::vector<double> clamp_probs(std::span<const double> raw, double eps_p) {
  check_eps(eps_p);
  std::vector<double> out(raw.begin(), raw.end());
  if (eps_p <= 0.0) return out;
  for (double& v : out) v = std::clamp(v, eps_p, 1.0 - eps_p);
  return out;
}

Matrix clamp_probs(const Matrix& raw, double eps_p) {
  check_eps(eps_p);
  Matrix out = raw;
  if (eps_p <= 0.0) return out;
  for (double& v : out.data) v = std::clamp(v, eps_p, 1.0 - eps_p);
  return out;
}

void clamp_backward(const Matrix& raw, double eps_p, Matrix& grad) {
  if (eps_p <= 0.0) return;
  for (std::size_t i = 0; i < raw.data.size(); ++i) {
    if (raw.data[i] < eps_p || raw.data[i] > 1.0 - eps_p) grad.data[i] = 0.0;
  }
}

}  // namespace loco::loss
