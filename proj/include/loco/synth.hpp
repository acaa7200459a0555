#pragma once

// Synthetic data with planted instantaneous events. Training code only ever
// sees TrainingSample (features + counts); event locations live in
// EventTruth, which is kept apart for evaluation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "loco/hilbert.hpp"
#include "loco/idx.hpp"
#include "loco/loss.hpp"
#include "loco/matrix.hpp"

namespace loco::synth {

struct TrainingSample {
  Matrix features;  // T x feature_dim
  loss::CountLabel counts;
  std::size_t length() const { return features.rows; }
};

struct EventTruth {
  std::vector<std::vector<std::size_t>> events;  // per channel, sorted step indices
  /// Per channel pixel centers matching `events` one to one (canvas data only).
  std::vector<std::vector<std::pair<double, double>>> centers;
};

struct SampleRecord {
  TrainingSample sample;
  EventTruth truth;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// 1D sequences

struct SynthConfig {
  std::size_t t_min = 200;
  std::size_t t_max = 400;
  std::size_t channels = 2;
  std::size_t feature_dim = 8;
  double event_rate = 0.015;        // per channel and step
  std::size_t min_separation = 5;   // steps between events of one channel
  double pulse_width = 1.0;         // temporal std of the bump, in steps
  double amplitude = 1.0;
  double band_width = 1.0;          // spread of a channel's band across features
  double noise_std = 0.2;
  double distractor_rate = 0.0;     // per step; flat broadband bumps
};

void validate(const SynthConfig& cfg);

/// Feature row band center of channel c: channels split the feature axis
/// evenly, each pulse peaks in the middle of its share.
double band_center(const SynthConfig& cfg, std::size_t channel);

SampleRecord gen_sequence(const SynthConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// 2D canvases

struct Glyph {
  hilbert::Image image;
  std::size_t label = 0;
};

struct CanvasConfig {
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t classes = 2;
  std::size_t min_glyphs = 1;
  std::size_t max_glyphs = 3;
  std::size_t glyph_size = 7;
  std::size_t min_gap = 1;  // empty pixels required between glyph boxes
  double noise_std = 0.05;
  std::size_t max_attempts = 1000;
};

struct GlyphPlacement {
  std::size_t label = 0;
  std::size_t x0 = 0, y0 = 0, width = 0, height = 0;
  double cx() const { return static_cast<double>(x0) + static_cast<double>(width) / 2.0; }
  double cy() const { return static_cast<double>(y0) + static_cast<double>(height) / 2.0; }
};

struct CanvasRecord {
  hilbert::Image image;
  std::vector<long long> counts;             // per class
  std::vector<GlyphPlacement> placements;    // evaluation only
  std::uint64_t seed = 0;
};

/// Places every glyph at a uniformly random position so that boxes (grown by
/// min_gap) do not overlap; overlapping draws are rejected and redrawn.
CanvasRecord compose_canvas(std::span<const Glyph> glyphs, const CanvasConfig& cfg,
                            std::uint64_t seed);

/// Synthetic glyph of a class: 0 is a filled disc, 1 a hollow square,
/// 2 a plus sign, 3 a diagonal cross. Intensity jitter comes from `seed`.
Glyph make_glyph(std::size_t label, std::size_t size, std::uint64_t seed);

/// Glyph bank from IDX images (N x H x W, bytes) and labels (N); digit
/// `class_digits[k]` becomes class k, other digits are skipped.
std::vector<Glyph> glyphs_from_idx(const idx::IdxTensor& images, const idx::IdxTensor& labels,
                                   std::span<const std::size_t> class_digits);

/// Full 2D sample: draws glyph count and classes, composes a canvas, scans it
/// along the curve. Glyphs come from `bank` when non-empty, otherwise from
/// make_glyph. Event index of a glyph = curve index of its center cell.
SampleRecord gen_canvas_sample(const CanvasConfig& cfg, const hilbert::HilbertCurve& curve,
                               std::span<const Glyph> bank, std::uint64_t seed);

/// Per-sample seed derived from a base seed and a running index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

}  // namespace loco::synth
