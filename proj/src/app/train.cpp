#include "loco/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "loco/error.hpp"
#include "loco/kernels.hpp"
#include "loco/parallel.hpp"

namespace loco::train {
namespace {

double count_error(const Matrix& probs, const loss::CountLabel& label) {
  double err = 0.0;
  for (std::size_t c = 0; c < probs.cols; ++c) {
    double expected = 0.0;
    for (std::size_t t = 0; t < probs.rows; ++t) expected += probs(t, c);
    err += std::abs(expected - static_cast<double>(label.counts[c]));
  }
  return err;
}

std::size_t channel_count(std::span<const synth::TrainingSample> samples) {
  return samples.empty() ? 0 : samples.front().counts.counts.size();
}

}  // namespace

EpochStats evaluate(const rnn::ModelParams& params, std::span<const synth::TrainingSample> samples,
                    const TrainConfig& cfg, std::size_t threads) {
  std::vector<double> losses(samples.size()), errors(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    const Matrix probs = rnn::predict(params, samples[i].features);
    rnn::check_output(probs);
    const Matrix clamped = loss::clamp_probs(probs, cfg.eps_p);
    losses[i] = loss::batch_nll(std::span<const Matrix>(&clamped, 1),
                                std::span<const loss::CountLabel>(&samples[i].counts, 1), cfg.k_max)
                    .report.total;
    errors[i] = count_error(probs, samples[i].counts);
  });
  EpochStats s;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    s.mean_nll += losses[i];
    s.count_mae += errors[i];
  }
  s.mean_nll /= n;
  s.count_mae /= n * static_cast<double>(channel_count(samples));
  return s;
}

BatchResult batch_gradient(const rnn::ModelParams& params,
                           std::span<const synth::TrainingSample> samples,
                           std::span<const std::size_t> indices, const TrainConfig& cfg,
                           std::size_t threads) {
  std::vector<rnn::SampleGradient> parts(indices.size());
  parallel_for(indices.size(), threads, [&](std::size_t j) {
    const synth::TrainingSample& s = samples[indices[j]];
    parts[j] = rnn::loss_and_grad(params, s.features, s.counts, cfg.k_max, cfg.eps_p);
  });

  BatchResult out;
  out.grads = rnn::Gradients(params.dims());
  const auto& k = kernels::active();
  const double scale = 1.0 / static_cast<double>(indices.size());
  const auto acc = out.grads.values();
  for (std::size_t j = 0; j < parts.size(); ++j) {
    out.loss += parts[j].loss;
    out.count_abs_error += count_error(parts[j].probs, samples[indices[j]].counts);
    k.axpy(scale, parts[j].grads.values().data(), acc.data(), acc.size());
  }
  out.loss *= scale;
  return out;
}

void fit(rnn::ModelParams& params, rnn::AdamState& adam,
         std::span<const synth::TrainingSample> samples, const TrainConfig& cfg,
         std::size_t threads, const EpochCallback& on_epoch) {
  if (samples.empty()) throw InvalidInput("no training samples");
  on_epoch(evaluate(params, samples, cfg, threads), params, adam);

  std::mt19937_64 rng(cfg.seed ^ 0x5eedf00dULL);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  const double channels = static_cast<double>(channel_count(samples));

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0, err_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, stop - start);
      BatchResult br = batch_gradient(params, samples, batch, cfg, threads);
      if (!std::isfinite(br.loss)) {
        throw TrainingDiverged("non-finite loss in epoch " + std::to_string(epoch), "loss", start,
                               br.loss);
      }
      rnn::clip_grad_norm(br.grads, cfg.clip_norm);
      rnn::adam_step(params, br.grads, adam);
      loss_sum += br.loss * static_cast<double>(batch.size());
      err_sum += br.count_abs_error;
    }
    const double n = static_cast<double>(samples.size());
    on_epoch(EpochStats{epoch, loss_sum / n, err_sum / (n * channels)}, params, adam);
  }
}

}  // namespace loco::train
