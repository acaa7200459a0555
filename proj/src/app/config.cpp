#include "loco/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace loco {
namespace {

struct KeySpec {
  std::string_view section;
  std::string_view key;
  std::string_view fallback;
};

// Order here is the canonical order.
constexpr std::array kKeys = {
    KeySpec{"task", "kind", "synthetic-1d"},
    KeySpec{"data", "seed", "7"},
    KeySpec{"data", "n_train", "2000"},
    KeySpec{"data", "n_test", "200"},
    KeySpec{"synth", "t_min", "200"},
    KeySpec{"synth", "t_max", "400"},
    KeySpec{"synth", "channels", "2"},
    KeySpec{"synth", "feature_dim", "8"},
    KeySpec{"synth", "event_rate", "0.015"},
    KeySpec{"synth", "min_separation", "5"},
    KeySpec{"synth", "pulse_width", "1"},
    KeySpec{"synth", "amplitude", "1"},
    KeySpec{"synth", "band_width", "1"},
    KeySpec{"synth", "noise_std", "0.2"},
    KeySpec{"synth", "distractor_rate", "0"},
    KeySpec{"canvas", "width", "64"},
    KeySpec{"canvas", "height", "64"},
    KeySpec{"canvas", "window", "8"},
    KeySpec{"canvas", "classes", "2"},
    KeySpec{"canvas", "min_glyphs", "1"},
    KeySpec{"canvas", "max_glyphs", "3"},
    KeySpec{"canvas", "glyph_size", "7"},
    KeySpec{"canvas", "min_gap", "1"},
    KeySpec{"canvas", "noise_std", "0.05"},
    KeySpec{"canvas", "idx_images", ""},
    KeySpec{"canvas", "idx_labels", ""},
    KeySpec{"canvas", "digits", "0,1"},
    KeySpec{"model", "hidden", "24"},
    KeySpec{"train", "seed", "1"},
    KeySpec{"train", "epochs", "40"},
    KeySpec{"train", "batch_size", "16"},
    KeySpec{"train", "lr", "0.003"},
    KeySpec{"train", "beta1", "0.9"},
    KeySpec{"train", "beta2", "0.999"},
    KeySpec{"train", "eps_adam", "1e-08"},
    KeySpec{"train", "clip_norm", "5"},
    KeySpec{"train", "k_max", "31"},
    KeySpec{"train", "omega", "0.5"},
    KeySpec{"train", "eps_p", "1e-06"},
    KeySpec{"train", "checkpoint_every", "10"},
    KeySpec{"eval", "tolerance", "2"},
    KeySpec{"eval", "threshold", "0.5"},
    KeySpec{"eval", "min_separation", "3"},
    KeySpec{"eval", "radius", "16"},
    KeySpec{"eval", "averaging", "micro"},
};

std::string full_key(const KeySpec& k) {
  return std::string(k.section) + "." + std::string(k.key);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t as_u64(const std::map<std::string, std::string>& v, const std::string& key) {
  const std::string& s = v.at(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': expected a nonnegative integer, got '" + s + "'");
  }
  return out;
}

std::size_t as_size(const std::map<std::string, std::string>& v, const std::string& key) {
  return static_cast<std::size_t>(as_u64(v, key));
}

double as_double(const std::map<std::string, std::string>& v, const std::string& key) {
  const std::string& s = v.at(key);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(out)) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + s + "'");
  }
  return out;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("config key '" + key + "': " + what);
}

/// Builds the typed view from a fully populated key map.
RunConfig build(std::map<std::string, std::string> v) {
  RunConfig c;
  const std::string& kind = v.at("task.kind");
  if (kind == "synthetic-1d") {
    c.task = Task::kSynthetic1d;
  } else if (kind == "hilbert-2d") {
    c.task = Task::kHilbert2d;
  } else {
    throw ConfigError("config key 'task.kind': expected synthetic-1d or hilbert-2d, got '" + kind +
                      "'");
  }
  c.data_seed = as_u64(v, "data.seed");
  c.n_train = as_size(v, "data.n_train");
  c.n_test = as_size(v, "data.n_test");

  c.synth.t_min = as_size(v, "synth.t_min");
  c.synth.t_max = as_size(v, "synth.t_max");
  c.synth.channels = as_size(v, "synth.channels");
  c.synth.feature_dim = as_size(v, "synth.feature_dim");
  c.synth.event_rate = as_double(v, "synth.event_rate");
  c.synth.min_separation = as_size(v, "synth.min_separation");
  c.synth.pulse_width = as_double(v, "synth.pulse_width");
  c.synth.amplitude = as_double(v, "synth.amplitude");
  c.synth.band_width = as_double(v, "synth.band_width");
  c.synth.noise_std = as_double(v, "synth.noise_std");
  c.synth.distractor_rate = as_double(v, "synth.distractor_rate");
  if (c.task == Task::kSynthetic1d) {
    try {
      synth::validate(c.synth);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("section [synth]: ") + e.what());
    }
  }

  c.canvas.width = as_size(v, "canvas.width");
  c.canvas.height = as_size(v, "canvas.height");
  c.window = as_size(v, "canvas.window");
  c.canvas.classes = as_size(v, "canvas.classes");
  c.canvas.min_glyphs = as_size(v, "canvas.min_glyphs");
  c.canvas.max_glyphs = as_size(v, "canvas.max_glyphs");
  c.canvas.glyph_size = as_size(v, "canvas.glyph_size");
  c.canvas.min_gap = as_size(v, "canvas.min_gap");
  c.canvas.noise_std = as_double(v, "canvas.noise_std");
  c.idx_images = v.at("canvas.idx_images");
  c.idx_labels = v.at("canvas.idx_labels");
  c.digits.clear();
  {
    std::stringstream ss(v.at("canvas.digits"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::map<std::string, std::string> one{{"canvas.digits", trim(item)}};
      c.digits.push_back(as_size(one, "canvas.digits"));
    }
  }
  if (c.task == Task::kHilbert2d) {
    require(c.window > 0, "canvas.window", "must be positive");
    require(c.canvas.classes > 0, "canvas.classes", "must be positive");
    require(c.canvas.min_glyphs <= c.canvas.max_glyphs, "canvas.min_glyphs",
            "must not exceed canvas.max_glyphs");
    require(c.canvas.glyph_size >= 3 && c.canvas.glyph_size <= std::min(c.canvas.width, c.canvas.height),
            "canvas.glyph_size", "must be between 3 and the canvas size");
    require(c.idx_images.empty() == c.idx_labels.empty(), "canvas.idx_labels",
            "idx_images and idx_labels must be given together");
    require(c.idx_images.empty() || c.digits.size() == c.canvas.classes, "canvas.digits",
            "needs one digit per class");
  }

  c.hidden = as_size(v, "model.hidden");
  require(c.hidden > 0, "model.hidden", "must be positive");

  c.train.seed = as_u64(v, "train.seed");
  c.train.epochs = as_size(v, "train.epochs");
  c.train.batch_size = as_size(v, "train.batch_size");
  require(c.train.batch_size > 0, "train.batch_size", "must be positive");
  c.train.adam.lr = as_double(v, "train.lr");
  c.train.adam.beta1 = as_double(v, "train.beta1");
  c.train.adam.beta2 = as_double(v, "train.beta2");
  c.train.adam.eps = as_double(v, "train.eps_adam");
  require(c.train.adam.lr > 0.0, "train.lr", "must be positive");
  require(c.train.adam.beta1 >= 0.0 && c.train.adam.beta1 < 1.0, "train.beta1", "must lie in [0,1)");
  require(c.train.adam.beta2 >= 0.0 && c.train.adam.beta2 < 1.0, "train.beta2", "must lie in [0,1)");
  c.train.clip_norm = as_double(v, "train.clip_norm");
  c.train.k_max = as_size(v, "train.k_max");
  require(c.train.k_max >= 1, "train.k_max", "must be at least 1");
  c.train.omega = as_double(v, "train.omega");
  require(c.train.omega > 0.0 && c.train.omega < 1.0, "train.omega", "must lie in (0,1)");
  c.train.eps_p = as_double(v, "train.eps_p");
  require(c.train.eps_p >= 0.0 && c.train.eps_p < 0.1, "train.eps_p", "must lie in [0,0.1)");
  c.train.checkpoint_every = as_size(v, "train.checkpoint_every");

  c.eval.tolerance = as_size(v, "eval.tolerance");
  c.eval.threshold = as_double(v, "eval.threshold");
  require(c.eval.threshold > 0.0 && c.eval.threshold < 1.0, "eval.threshold", "must lie in (0,1)");
  c.eval.min_separation = as_size(v, "eval.min_separation");
  require(c.eval.min_separation >= 1, "eval.min_separation", "must be at least 1");
  c.eval.radius = as_double(v, "eval.radius");
  const std::string& avg = v.at("eval.averaging");
  require(avg == "micro" || avg == "macro", "eval.averaging", "expected micro or macro");
  c.eval.macro = avg == "macro";

  c.values = std::move(v);
  return c;
}

std::map<std::string, std::string> defaults() {
  std::map<std::string, std::string> v;
  for (const KeySpec& k : kKeys) v[full_key(k)] = std::string(k.fallback);
  return v;
}

std::string canonical_of(const std::map<std::string, std::string>& v,
                         std::initializer_list<std::string_view> sections) {
  std::string out;
  std::string_view current;
  for (const KeySpec& k : kKeys) {
    if (sections.size() &&
        std::find(sections.begin(), sections.end(), k.section) == sections.end()) {
      continue;
    }
    if (k.section != current) {
      current = k.section;
      out += "[" + std::string(current) + "]\n";
    }
    out += std::string(k.key) + " = " + v.at(full_key(k)) + "\n";
  }
  return out;
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunConfig::canonical() const { return canonical_of(values, {}); }

std::string RunConfig::config_hash() const { return fnv1a_hex(canonical()); }

std::string RunConfig::data_hash() const {
  return fnv1a_hex(canonical_of(values, {"task", "data", "synth", "canvas"}));
}

std::size_t RunConfig::feature_dim() const {
  return task == Task::kSynthetic1d ? synth.feature_dim : window * window;
}

std::size_t RunConfig::channels() const {
  return task == Task::kSynthetic1d ? synth.channels : canvas.classes;
}

std::size_t RunConfig::reference_length() const {
  return task == Task::kSynthetic1d ? (synth.t_min + synth.t_max) / 2 : curve().length();
}

hilbert::HilbertCurve RunConfig::curve() const {
  hilbert::Image probe;
  probe.width = canvas.width;
  probe.height = canvas.height;
  return hilbert::curve_for(probe, window, window);
}

RunConfig default_config() { return build(defaults()); }

RunConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> v = defaults();
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      const bool known = std::any_of(kKeys.begin(), kKeys.end(),
                                     [&](const KeySpec& k) { return k.section == section; });
      if (!known) throw ConfigError("unknown config section '" + section + "'");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    if (!v.contains(full)) throw ConfigError("unknown config key '" + full + "'");
    v[full] = value;
  }
  return build(std::move(v));
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  std::map<std::string, std::string> v = cfg.values.empty() ? defaults() : cfg.values;
  if (!v.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  v[key] = value;
  cfg = build(std::move(v));
}

}  // namespace loco
