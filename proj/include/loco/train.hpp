#pragma once

// Minibatch training of the sequence model on count labels.

#include <cstddef>
#include <functional>
#include <span>

#include "loco/config.hpp"
#include "loco/rnn.hpp"
#include "loco/synth.hpp"

namespace loco::train {

struct EpochStats {
  std::size_t epoch = 0;
  double mean_nll = 0.0;
  double count_mae = 0.0;  // mean |sum_t p(t) - y| over samples and channels
};

/// Loss and expected-count error of the current model over a whole set,
/// without updating anything.
EpochStats evaluate(const rnn::ModelParams& params, std::span<const synth::TrainingSample> samples,
                    const TrainConfig& cfg, std::size_t threads);

/// Mean gradient of one minibatch. Per-sample gradients are computed
/// independently (possibly in parallel) and summed in index order.
struct BatchResult {
  double loss = 0.0;
  double count_abs_error = 0.0;  // summed over samples and channels
  rnn::Gradients grads;
};

BatchResult batch_gradient(const rnn::ModelParams& params,
                           std::span<const synth::TrainingSample> samples,
                           std::span<const std::size_t> indices, const TrainConfig& cfg,
                           std::size_t threads);

/// Called after every epoch (epoch 0 is the untouched initial model).
using EpochCallback =
    std::function<void(const EpochStats&, const rnn::ModelParams&, const rnn::AdamState&)>;

/// Runs cfg.epochs epochs with a shuffled order drawn from cfg.seed. Throws
/// TrainingDiverged on a non-finite loss or gradient.
void fit(rnn::ModelParams& params, rnn::AdamState& adam,
         std::span<const synth::TrainingSample> samples, const TrainConfig& cfg,
         std::size_t threads, const EpochCallback& on_epoch);

}  // namespace loco::train
