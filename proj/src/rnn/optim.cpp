#include <cmath>
#include <string>

#include "loco/error.hpp"
#include "loco/kernels.hpp"
#include "loco/rnn.hpp"

namespace loco::rnn {

AdamState make_adam(const ModelParams& params, const AdamConfig& config) {
  AdamState state;
  state.config = config;
  state.m.assign(params.size(), 0.0);
  state.v.assign(params.size(), 0.0);
  return state;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state) {
  if (!(params.dims() == grads.dims()) || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw InvalidInput("adam_step: parameter, gradient and moment shapes differ");
  }
  const auto g = grads.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      for (const TensorInfo& ti : grads.layout()) {
        if (i >= ti.offset && i < ti.offset + ti.size()) {
          throw TrainingDiverged("non-finite gradient in " + std::string(ti.name) + "[" +
                                     std::to_string(i - ti.offset) + "] = " + std::to_string(g[i]),
                                 std::string(ti.name), i - ti.offset, g[i]);
        }
      }
    }
  }
  ++state.step;
  const AdamConfig& cfg = state.config;
  const double step = static_cast<double>(state.step);
  const kernels::AdamCoeffs coeffs{cfg.lr,
                                   cfg.beta1,
                                   cfg.beta2,
                                   cfg.eps,
                                   1.0 - std::pow(cfg.beta1, step),
                                   1.0 - std::pow(cfg.beta2, step)};
  kernels::active().adam_update(params.values().data(), g.data(), state.m.data(), state.v.data(),
                                g.size(), coeffs);
}

double clip_grad_norm(Gradients& grads, double max_norm) {
  const auto g = grads.values();
  const double norm = std::sqrt(kernels::active().dot(g.data(), g.data(), g.size()));
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& v : g) v *= scale;
  }
  return norm;
}

}  // namespace loco::rnn
