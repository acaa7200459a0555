#pragma once

// Causal sequence model producing per-step event probabilities:
//   a(t) = tanh(W_in x(t) + b_in)
//   GRU over a(t) with hidden state h(t), h(0) = 0
//   p(t) = sigmoid(W_out h(t) + b_out)
// with hand-written backpropagation through time and an Adam optimizer.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "loco/loss.hpp"
#include "loco/matrix.hpp"

namespace loco::rnn {

struct ModelDims {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::size_t channels = 0;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

enum class Tensor : std::size_t {
  kInputWeight,
  kInputBias,
  kUpdateInput,
  kUpdateRecurrent,
  kUpdateBias,
  kResetInput,
  kResetRecurrent,
  kResetBias,
  kCandidateInput,
  kCandidateRecurrent,
  kCandidateBias,
  kHeadWeight,
  kHeadBias,
};
inline constexpr std::size_t kTensorCount = 13;

struct TensorInfo {
  std::string_view name;
  std::size_t rows = 0;  // 1 for biases
  std::size_t cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return rows * cols; }
};

/// All trainable values in one flat buffer; named tensors are views into it.
/// Gradients and optimizer moments use the same layout.
class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(ModelDims dims);

  const ModelDims& dims() const noexcept { return dims_; }
  const std::array<TensorInfo, kTensorCount>& layout() const noexcept { return layout_; }
  const TensorInfo& info(Tensor t) const { return layout_[static_cast<std::size_t>(t)]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> tensor(Tensor t);
  std::span<const double> tensor(Tensor t) const;

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.dims_ == b.dims_ && a.data_ == b.data_;
  }

 private:
  ModelDims dims_{};
  std::array<TensorInfo, kTensorCount> layout_{};
  std::vector<double> data_;
};

using Gradients = ModelParams;

struct InitOptions {
  std::uint64_t seed = 0;
  double omega = 0.5;              // zero-count mass at initialization
  std::size_t reference_length = 1;  // T used for the head bias
};

/// Uniform weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases, zero
/// head weights and head biases from loss::init_bias(omega, reference_length).
ModelParams init_params(ModelDims dims, const InitOptions& opts);

/// Activations kept for the backward pass.
struct ForwardCache {
  ModelDims dims{};
  std::size_t steps = 0;
  Matrix x;       // T x input
  Matrix a;       // T x hidden
  Matrix z;       // T x hidden
  Matrix r;       // T x hidden
  Matrix c;       // T x hidden, candidate state
  Matrix h;       // (T+1) x hidden, row 0 is the initial state
  Matrix logits;  // T x channels
  Matrix probs;   // T x channels
};

struct ForwardResult {
  Matrix probs;
  ForwardCache cache;
};

ForwardResult forward(const ModelParams& params, const Matrix& x);

/// Probabilities only; no cache.
Matrix predict(const ModelParams& params, const Matrix& x);

/// Gradients of a scalar loss with respect to every parameter, given
/// dL/dp for the sigmoid outputs.
Gradients backward(const ModelParams& params, const ForwardCache& cache, const Matrix& dloss_dprob);

// ---------------------------------------------------------------------------
// Optimizer

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config{};
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

AdamState make_adam(const ModelParams& params, const AdamConfig& config);

/// One bias-corrected Adam update. Throws TrainingDiverged naming the first
/// non-finite gradient entry; params and state are untouched in that case.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state);

/// Scales grads in place so their global L2 norm is at most max_norm.
/// Returns the norm before scaling.
double clip_grad_norm(Gradients& grads, double max_norm);

// ---------------------------------------------------------------------------
// Full pipeline: forward -> clamp -> count NLL -> backward.

struct SampleGradient {
  double loss = 0.0;
  Matrix probs;  // raw model output
  Gradients grads;
};

/// Throws TrainingDiverged if any probability is NaN or infinite.
void check_output(const Matrix& probs);

SampleGradient loss_and_grad(const ModelParams& params, const Matrix& x,
                             const loss::CountLabel& label, std::size_t k_max, double eps_p);

double loss_only(const ModelParams& params, const Matrix& x, const loss::CountLabel& label,
                 std::size_t k_max, double eps_p);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares analytic pipeline gradients with central differences for every
/// parameter. The relative error of one entry is
/// |a - n| / max(|a|, |n|, kGradCheckFloor).
inline constexpr double kGradCheckFloor = 1e-4;

GradCheckReport grad_check(const ModelParams& params, const Matrix& x,
                           const loss::CountLabel& label, double h, std::size_t k_max = 31,
                           double eps_p = loss::kDefaultEpsP);

}  // namespace loco::rnn
