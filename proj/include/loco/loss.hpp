#pragma once

// Batch-level count loss over multi-channel probability sequences.
// Channels are independent Poisson-binomial counts whose NLLs add; the batch
// value is the mean over samples.

#include <cstddef>
#include <span>
#include <vector>

#include "loco/matrix.hpp"

namespace loco::loss {

inline constexpr double kDefaultEpsP = 1e-6;

/// Observed per-channel event counts of one sample.
struct CountLabel {
  std::vector<long long> counts;
};

struct LossReport {
  double total = 0.0;               // mean over samples of the channel-summed NLL
  std::vector<double> per_sample;   // channel-summed NLL of each sample
  std::vector<double> per_channel;  // mean over samples of each channel's NLL
};

struct BatchLoss {
  LossReport report;
  /// d total / d p for each sample (T x C), empty unless requested.
  std::vector<Matrix> grads;
};

/// `probs[i]` is T_i x C and is expected to be clamped already; lengths may
/// differ between samples.
BatchLoss batch_nll(std::span<const Matrix> probs, std::span<const CountLabel> labels,
                    std::size_t k_max, bool with_grad = false);

/// Pre-sigmoid offset that makes a constant sequence of length T put mass
/// omega on the zero-count bin: log((1 - omega^(1/T)) / omega^(1/T)).
double init_bias(double omega, std::size_t length);

/// Elementwise clamp to [eps_p, 1 - eps_p]; eps_p = 0 is a no-op.
std::vector<double> clamp_probs(std::span<const double> raw, double eps_p);
Matrix clamp_probs(const Matrix& raw, double eps_p);

/// Zero the gradient entries whose raw probability was clamped.
void clamp_backward(const Matrix& raw, double eps_p, Matrix& grad);

}  // namespace loco::loss
