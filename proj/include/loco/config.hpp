#pragma once

// Run configuration: flat UTF-8 "key = value" lines grouped under [section]
// headers, '#' starts a comment. Every key has a default; unknown sections
// or keys are rejected. The canonical form (all keys, fixed order) is what
// gets echoed into artifacts and hashed.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "loco/error.hpp"
#include "loco/rnn.hpp"
#include "loco/synth.hpp"

namespace loco {

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Task { kSynthetic1d, kHilbert2d };

struct TrainConfig {
  std::uint64_t seed = 1;
  std::size_t epochs = 40;
  std::size_t batch_size = 16;
  rnn::AdamConfig adam{3e-3, 0.9, 0.999, 1e-8};
  double clip_norm = 5.0;
  std::size_t k_max = 31;
  double omega = 0.5;
  double eps_p = 1e-6;
  std::size_t checkpoint_every = 10;
};

struct EvalConfig {
  std::size_t tolerance = 2;
  double threshold = 0.5;
  std::size_t min_separation = 3;
  double radius = 16.0;  // pixel radius for 2D center matching
  bool macro = false;
};

struct RunConfig {
  Task task = Task::kSynthetic1d;
  std::uint64_t data_seed = 7;
  std::size_t n_train = 2000;
  std::size_t n_test = 200;
  synth::SynthConfig synth;
  synth::CanvasConfig canvas;
  std::size_t window = 8;
  std::string idx_images;
  std::string idx_labels;
  std::vector<std::size_t> digits{0, 1};
  std::size_t hidden = 24;
  TrainConfig train;
  EvalConfig eval;

  /// Every known key ("section.key") with its resolved value.
  std::map<std::string, std::string> values;

  std::string canonical() const;
  /// FNV-1a 64 of canonical(), hex.
  std::string config_hash() const;
  /// Hash of the keys that determine generated data (task, data, synth, canvas).
  std::string data_hash() const;

  std::size_t feature_dim() const;
  std::size_t channels() const;
  /// Sequence length used for the initial head bias.
  std::size_t reference_length() const;
  hilbert::HilbertCurve curve() const;
};

RunConfig default_config();
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Overrides one "section.key" and re-validates.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace loco
