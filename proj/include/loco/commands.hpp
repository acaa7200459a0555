#pragma once

// The four subcommands of the experiment runner plus the in-memory pieces
// they are built from (generation, evaluation), which tests call directly.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loco/config.hpp"
#include "loco/eval.hpp"
#include "loco/rnn.hpp"
#include "loco/synth.hpp"

namespace loco::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDiverged = 3;

struct Dataset {
  std::vector<synth::SampleRecord> train;
  std::vector<synth::SampleRecord> test;
};

/// Train and test records for a configuration; sample i of a split uses
/// derive_seed(data seed, split, i), so the result is independent of threads.
Dataset generate(const RunConfig& cfg, std::size_t threads);

/// Freshly initialized model for a configuration (train seed, omega, sizes).
rnn::ModelParams initial_model(const RunConfig& cfg);

struct EvalReport {
  std::vector<eval::SampleMetrics> rows;
  eval::Summary summary;
  double count_accuracy = 0.0;
  /// Mean predicted - true step offset of matched 1D events.
  double mean_signed_error = 0.0;
  /// Mean pixel distance of matched 2D centers.
  double mean_center_error = 0.0;
  /// Fraction of decoded events whose probability exceeds 0.9.
  double sharp_event_fraction = 0.0;
  /// Fraction of steps farther than the tolerance from every true event of
  /// their channel whose probability is below 0.1.
  double quiet_fraction = 0.0;
};

/// Scores given probability sequences (one T x C matrix per sample).
EvalReport score(std::span<const Matrix> probs, std::span<const synth::EventTruth> truth,
                 const RunConfig& cfg);

/// Model forward pass over every sample, then score().
EvalReport run_eval(const rnn::ModelParams& params, std::span<const synth::TrainingSample> samples,
                    std::span<const synth::EventTruth> truth, const RunConfig& cfg,
                    std::size_t threads);

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::size_t> tolerance;
  std::optional<double> threshold;
  std::optional<std::size_t> trials;
  std::string inject_fault;  // props only: "sign-flip"
  std::size_t threads = 1;
};

int cmd_gen(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_train(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_eval(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_props(const CommandOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace loco::cli
