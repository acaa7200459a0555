#include "loco/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "loco/error.hpp"

namespace loco::synth {
namespace {

constexpr int kPlacementRounds = 20;
constexpr int kDrawsPerEvent = 1000;

/// Event times for one channel: `count` draws in [0, length) with pairwise
/// gaps of at least `min_sep`, by sequential rejection.
std::vector<std::size_t> place_events(std::mt19937_64& rng, std::size_t count, std::size_t length,
                                      std::size_t min_sep) {
  std::uniform_int_distribution<std::size_t> pos(0, length - 1);
  for (int round = 0; round < kPlacementRounds; ++round) {
    std::vector<std::size_t> events;
    bool ok = true;
    for (std::size_t e = 0; e < count && ok; ++e) {
      ok = false;
      for (int draw = 0; draw < kDrawsPerEvent; ++draw) {
        const std::size_t t = pos(rng);
        const bool clear = std::all_of(events.begin(), events.end(), [&](std::size_t u) {
          return (t > u ? t - u : u - t) >= min_sep;
        });
        if (clear) {
          events.push_back(t);
          ok = true;
          break;
        }
      }
    }
    if (ok) {
      std::sort(events.begin(), events.end());
      return events;
    }
  }
  throw GenerationError("cannot place " + std::to_string(count) + " events with separation " +
                        std::to_string(min_sep) + " in " + std::to_string(length) + " steps");
}

void add_bump(Matrix& features, std::size_t center, double width, double amplitude,
              std::span<const double> profile) {
  const auto reach = static_cast<long long>(std::ceil(3.0 * width));
  const auto t0 = static_cast<long long>(center);
  for (long long t = std::max(0LL, t0 - reach);
       t <= std::min(static_cast<long long>(features.rows) - 1, t0 + reach); ++t) {
    const double dt = static_cast<double>(t - t0);
    const double envelope = amplitude * std::exp(-dt * dt / (2.0 * width * width));
    auto row = features.row(static_cast<std::size_t>(t));
    for (std::size_t f = 0; f < row.size(); ++f) row[f] += envelope * profile[f];
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t{out[0]} << 32) | out[1];
}

void validate(const SynthConfig& cfg) {
  if (cfg.t_min == 0 || cfg.t_min > cfg.t_max) throw InvalidInput("need 1 <= t_min <= t_max");
  if (cfg.channels == 0) throw InvalidInput("need at least one channel");
  if (cfg.feature_dim == 0) throw InvalidInput("need at least one feature");
  if (cfg.min_separation == 0) throw InvalidInput("min_separation must be at least 1");
  if (!(cfg.event_rate >= 0.0 && cfg.event_rate <= 1.0)) throw InvalidInput("event_rate in [0,1]");
  if (!(cfg.distractor_rate >= 0.0 && cfg.distractor_rate <= 1.0)) {
    throw InvalidInput("distractor_rate in [0,1]");
  }
  if (!(cfg.pulse_width > 0.0) || !(cfg.band_width > 0.0)) {
    throw InvalidInput("pulse_width and band_width must be positive");
  }
  if (!(cfg.noise_std >= 0.0)) throw InvalidInput("noise_std must be nonnegative");
}

double band_center(const SynthConfig& cfg, std::size_t channel) {
  const double share = static_cast<double>(cfg.feature_dim) / static_cast<double>(cfg.channels);
  return (static_cast<double>(channel) + 0.5) * share - 0.5;
}

SampleRecord gen_sequence(const SynthConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  std::mt19937_64 rng(seed);
  const std::size_t length = std::uniform_int_distribution<std::size_t>(cfg.t_min, cfg.t_max)(rng);

  SampleRecord rec;
  rec.seed = seed;
  rec.sample.features = Matrix(length, cfg.feature_dim);
  rec.sample.counts.counts.assign(cfg.channels, 0);
  rec.truth.events.resize(cfg.channels);

  std::vector<double> profile(cfg.feature_dim);
  for (std::size_t c = 0; c < cfg.channels; ++c) {
    const std::size_t count =
        std::binomial_distribution<std::size_t>(length, cfg.event_rate)(rng);
    rec.truth.events[c] = place_events(rng, count, length, cfg.min_separation);
    rec.sample.counts.counts[c] = static_cast<long long>(count);

    const double mu = band_center(cfg, c);
    for (std::size_t f = 0; f < cfg.feature_dim; ++f) {
      const double df = static_cast<double>(f) - mu;
      profile[f] = std::exp(-df * df / (2.0 * cfg.band_width * cfg.band_width));
    }
    for (std::size_t t : rec.truth.events[c]) {
      add_bump(rec.sample.features, t, cfg.pulse_width, cfg.amplitude, profile);
    }
  }

  if (cfg.distractor_rate > 0.0) {
    // flat across all features and twice as wide: no channel's shape
    std::fill(profile.begin(), profile.end(), 0.6);
    const std::size_t count =
        std::binomial_distribution<std::size_t>(length, cfg.distractor_rate)(rng);
    std::uniform_int_distribution<std::size_t> pos(0, length - 1);
    for (std::size_t i = 0; i < count; ++i) {
      add_bump(rec.sample.features, pos(rng), 2.0 * cfg.pulse_width, cfg.amplitude, profile);
    }
  }

  if (cfg.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    for (double& v : rec.sample.features.data) v += noise(rng);
  }
  return rec;
}

// ---------------------------------------------------------------------------

Glyph make_glyph(std::size_t label, std::size_t size, std::uint64_t seed) {
  if (size < 3) throw InvalidInput("glyph size must be at least 3");
  std::mt19937_64 rng(seed);
  const double intensity = std::uniform_real_distribution<double>(0.8, 1.0)(rng);
  Glyph g{hilbert::Image(size, size), label};
  const double mid = (static_cast<double>(size) - 1.0) / 2.0;
  const double radius = static_cast<double>(size) / 2.0;
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double dx = static_cast<double>(x) - mid, dy = static_cast<double>(y) - mid;
      bool on = false;
      switch (label % 4) {
        case 0:
          on = dx * dx + dy * dy <= radius * radius;
          break;
        case 1:
          on = x == 0 || y == 0 || x + 1 == size || y + 1 == size;
          break;
        case 2:
          on = std::abs(dx) < 1.0 || std::abs(dy) < 1.0;
          break;
        case 3:
          on = std::abs(dx - dy) < 1.0 || std::abs(dx + dy) < 1.0;
          break;
      }
      if (on) g.image.at(x, y) = intensity;
    }
  }
  return g;
}

std::vector<Glyph> glyphs_from_idx(const idx::IdxTensor& images, const idx::IdxTensor& labels,
                                   std::span<const std::size_t> class_digits) {
  if (images.dims.size() != 3) throw InvalidInput("glyph images must be N x H x W");
  if (labels.dims.size() != 1 || labels.dims[0] != images.dims[0]) {
    throw InvalidInput("glyph labels must be a vector of length N");
  }
  const std::size_t n = images.dims[0], h = images.dims[1], w = images.dims[2];
  std::vector<Glyph> bank;
  for (std::size_t i = 0; i < n; ++i) {
    // byte labels were scaled to [0,1] on load
    const double raw = labels.type == idx::ElementType::kUint8 ? labels.values[i] * 255.0
                                                                : labels.values[i];
    const auto digit = static_cast<std::size_t>(std::lround(raw));
    const auto it = std::find(class_digits.begin(), class_digits.end(), digit);
    if (it == class_digits.end()) continue;
    Glyph g{hilbert::Image(w, h), static_cast<std::size_t>(it - class_digits.begin())};
    std::copy_n(images.values.begin() + static_cast<std::ptrdiff_t>(i * h * w), h * w,
                g.image.pixels.begin());
    bank.push_back(std::move(g));
  }
  return bank;
}

CanvasRecord compose_canvas(std::span<const Glyph> glyphs, const CanvasConfig& cfg,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CanvasRecord rec;
  rec.seed = seed;
  rec.image = hilbert::Image(cfg.width, cfg.height);
  rec.counts.assign(cfg.classes, 0);

  for (const Glyph& g : glyphs) {
    if (g.image.width > cfg.width || g.image.height > cfg.height) {
      throw InvalidInput("glyph larger than canvas");
    }
    if (g.label >= cfg.classes) throw InvalidInput("glyph label outside configured classes");
    std::uniform_int_distribution<std::size_t> px(0, cfg.width - g.image.width);
    std::uniform_int_distribution<std::size_t> py(0, cfg.height - g.image.height);
    bool placed = false;
    for (std::size_t attempt = 0; attempt < cfg.max_attempts && !placed; ++attempt) {
      GlyphPlacement cand{g.label, px(rng), py(rng), g.image.width, g.image.height};
      const auto gap = cfg.min_gap;
      const bool clear =
          std::none_of(rec.placements.begin(), rec.placements.end(), [&](const GlyphPlacement& o) {
            return cand.x0 < o.x0 + o.width + gap && o.x0 < cand.x0 + cand.width + gap &&
                   cand.y0 < o.y0 + o.height + gap && o.y0 < cand.y0 + cand.height + gap;
          });
      if (!clear) continue;
      for (std::size_t y = 0; y < cand.height; ++y) {
        for (std::size_t x = 0; x < cand.width; ++x) {
          double& dst = rec.image.at(cand.x0 + x, cand.y0 + y);
          dst = std::max(dst, g.image.at(x, y));
        }
      }
      rec.placements.push_back(cand);
      ++rec.counts[g.label];
      placed = true;
    }
    if (!placed) {
      throw GenerationError("could not place glyph " + std::to_string(rec.placements.size()) +
                            " without overlap after " + std::to_string(cfg.max_attempts) +
                            " attempts");
    }
  }

  if (cfg.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    for (double& v : rec.image.pixels) v += noise(rng);
  }
  return rec;
}

SampleRecord gen_canvas_sample(const CanvasConfig& cfg, const hilbert::HilbertCurve& curve,
                               std::span<const Glyph> bank, std::uint64_t seed) {
  if (cfg.classes == 0 || cfg.min_glyphs > cfg.max_glyphs) {
    throw InvalidInput("need classes >= 1 and min_glyphs <= max_glyphs");
  }
  std::mt19937_64 rng(seed);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(cfg.min_glyphs, cfg.max_glyphs)(rng);
  std::uniform_int_distribution<std::size_t> pick_class(0, cfg.classes - 1);

  std::vector<std::vector<const Glyph*>> by_class(cfg.classes);
  for (const Glyph& g : bank) {
    if (g.label < cfg.classes) by_class[g.label].push_back(&g);
  }
  std::vector<Glyph> chosen;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = pick_class(rng);
    if (bank.empty()) {
      chosen.push_back(make_glyph(label, cfg.glyph_size, rng()));
    } else {
      const auto& pool = by_class[label];
      if (pool.empty()) throw GenerationError("glyph bank has no images of class " + std::to_string(label));
      chosen.push_back(*pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
    }
  }
  const CanvasRecord canvas = compose_canvas(chosen, cfg, rng());

  SampleRecord rec;
  rec.seed = seed;
  rec.sample.features = hilbert::scan_image(canvas.image, curve).sequence;
  rec.sample.counts.counts = canvas.counts;
  rec.truth.events.resize(cfg.classes);
  rec.truth.centers.resize(cfg.classes);

  std::vector<std::vector<std::pair<std::size_t, std::pair<double, double>>>> tagged(cfg.classes);
  for (const GlyphPlacement& gp : canvas.placements) {
    const auto d = static_cast<std::size_t>(hilbert::index_of_pixel(curve, gp.cx(), gp.cy()));
    tagged[gp.label].push_back({d, {gp.cx(), gp.cy()}});
  }
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    std::sort(tagged[c].begin(), tagged[c].end());
    for (const auto& [d, center] : tagged[c]) {
      rec.truth.events[c].push_back(d);
      rec.truth.centers[c].push_back(center);
    }
  }
  return rec;
}

}  // namespace loco::synth
