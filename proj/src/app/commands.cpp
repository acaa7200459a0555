#include "loco/commands.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "loco/checkpoint.hpp"
#include "loco/dataset.hpp"
#include "loco/error.hpp"
#include "loco/idx.hpp"
#include "loco/parallel.hpp"
#include "loco/props.hpp"
#include "loco/train.hpp"

namespace fs = std::filesystem;

namespace loco::cli {
namespace {

constexpr double kSharpLevel = 0.9;
constexpr double kQuietLevel = 0.1;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

RunConfig resolve_config(const CommandOptions& opts, const std::optional<fs::path>& fallback) {
  if (opts.config) return load_config(*opts.config);
  if (fallback && fs::exists(*fallback)) return load_config(*fallback);
  return default_config();
}

std::vector<synth::Glyph> glyph_bank(const RunConfig& cfg) {
  if (cfg.idx_images.empty()) return {};
  const idx::IdxTensor images = idx::load_idx(cfg.idx_images);
  const idx::IdxTensor labels = idx::load_idx(cfg.idx_labels);
  return synth::glyphs_from_idx(images, labels, cfg.digits);
}

std::vector<synth::SampleRecord> generate_split(const RunConfig& cfg, std::uint64_t stream,
                                                std::size_t n, std::span<const synth::Glyph> bank,
                                                std::size_t threads) {
  std::vector<synth::SampleRecord> out(n);
  const hilbert::HilbertCurve curve = cfg.curve();
  parallel_for(n, threads, [&](std::size_t i) {
    const std::uint64_t seed = synth::derive_seed(cfg.data_seed, stream, i);
    out[i] = cfg.task == Task::kSynthetic1d ? synth::gen_sequence(cfg.synth, seed)
                                            : synth::gen_canvas_sample(cfg.canvas, curve, bank, seed);
  });
  return out;
}

std::map<std::string, std::string> artifact_meta(const RunConfig& cfg) {
  return {{"config", cfg.canonical()},
          {"config_hash", cfg.config_hash()},
          {"data_hash", cfg.data_hash()}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
}

void ensure_dir(const fs::path& dir) {
  fs::create_directories(dir);
  if (!fs::is_directory(dir)) throw std::ios_base::failure("cannot create " + dir.string());
}

/// Steps of one channel farther than `tol` from every event in `events`.
void quiet_steps(std::span<const std::size_t> events, std::size_t steps, std::size_t tol,
                 const Matrix& probs, std::size_t channel, std::size_t& quiet,
                 std::size_t& total) {
  std::size_t next = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    while (next < events.size() && events[next] + tol < t) ++next;
    const bool near = next < events.size() && events[next] <= t + tol;
    if (near) continue;
    ++total;
    if (probs(t, channel) < kQuietLevel) ++quiet;
  }
}

int usage_error(std::ostream& err, const std::string& msg) {
  err << "error: " << msg << "\n";
  return kExitUsage;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    return usage_error(err, e.what());
  } catch (const FormatError& e) {
    return usage_error(err, e.what());
  } catch (const InvalidInput& e) {
    return usage_error(err, e.what());
  } catch (const fs::filesystem_error& e) {
    return usage_error(err, e.what());
  } catch (const std::ios_base::failure& e) {
    return usage_error(err, e.what());
  }
}

}  // namespace

Dataset generate(const RunConfig& cfg, std::size_t threads) {
  const std::vector<synth::Glyph> bank =
      cfg.task == Task::kHilbert2d ? glyph_bank(cfg) : std::vector<synth::Glyph>{};
  Dataset d;
  d.train = generate_split(cfg, 0, cfg.n_train, bank, threads);
  d.test = generate_split(cfg, 1, cfg.n_test, bank, threads);
  return d;
}

rnn::ModelParams initial_model(const RunConfig& cfg) {
  return rnn::init_params({cfg.feature_dim(), cfg.hidden, cfg.channels()},
                          {cfg.train.seed, cfg.train.omega, cfg.reference_length()});
}

EvalReport score(std::span<const Matrix> probs, std::span<const synth::EventTruth> truth,
                 const RunConfig& cfg) {
  if (probs.size() != truth.size()) throw InvalidInput("probability and truth counts differ");
  const EvalConfig& ec = cfg.eval;
  const bool planar = cfg.task == Task::kHilbert2d;
  const hilbert::HilbertCurve curve = cfg.curve();

  EvalReport rep;
  std::vector<eval::MatchResult> matches;
  std::size_t sharp = 0, decoded = 0, quiet = 0, off = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const Matrix& p = probs[i];
    const eval::DecodedEvents dec = eval::decode_all(p, ec.threshold, ec.min_separation,
                                                     cfg.train.k_max);
    std::vector<eval::MatchResult> parts;
    eval::SampleMetrics row;
    row.id = i;
    for (std::size_t c = 0; c < p.cols; ++c) {
      const auto& events = dec.events[c];
      const auto& true_events = truth[i].events[c];
      if (planar) {
        std::vector<eval::Point> pred;
        for (std::size_t d : events) pred.push_back(hilbert::cell_center(curve, d));
        parts.push_back(eval::match_points(pred, truth[i].centers[c], ec.radius));
      } else {
        parts.push_back(eval::match(events, true_events, ec.tolerance));
      }
      for (std::size_t d : events) {
        ++decoded;
        if (p(d, c) > kSharpLevel) ++sharp;
      }
      quiet_steps(true_events, p.rows, ec.tolerance, p, c, quiet, off);
      row.label.push_back(static_cast<long long>(true_events.size()));
      row.modal.push_back(dec.modal_count[c]);
      row.expected.push_back(dec.expected_count[c]);
    }
    row.match = eval::combine(parts);
    matches.push_back(row.match);
    rep.rows.push_back(std::move(row));
  }
  rep.summary = eval::aggregate(matches, ec.macro ? eval::Averaging::kMacro : eval::Averaging::kMicro);
  rep.count_accuracy = eval::count_accuracy(rep.rows);
  (planar ? rep.mean_center_error : rep.mean_signed_error) = rep.summary.mean_error;
  rep.sharp_event_fraction = decoded ? static_cast<double>(sharp) / static_cast<double>(decoded) : 0.0;
  rep.quiet_fraction = off ? static_cast<double>(quiet) / static_cast<double>(off) : 1.0;
  return rep;
}

EvalReport run_eval(const rnn::ModelParams& params, std::span<const synth::TrainingSample> samples,
                    std::span<const synth::EventTruth> truth, const RunConfig& cfg,
                    std::size_t threads) {
  std::vector<Matrix> probs(samples.size());
  parallel_for(samples.size(), threads,
               [&](std::size_t i) { probs[i] = rnn::predict(params, samples[i].features); });
  return score(probs, truth, cfg);
}

int cmd_gen(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    if (!opts.out) return usage_error(err, "gen needs --out");
    RunConfig cfg = resolve_config(opts, std::nullopt);
    if (opts.seed) set_config_value(cfg, "data.seed", std::to_string(*opts.seed));

    const fs::path root = *opts.out;
    ensure_dir(root / "train");
    ensure_dir(root / "test");
    const Dataset d = generate(cfg, opts.threads);
    dataset::write_split(root / "train", d.train);
    dataset::write_split(root / "test", d.test);
    write_text(root / "config.txt", cfg.canonical());
    dataset::write_manifest(root / "manifest.txt",
                            {{"task", cfg.values.at("task.kind")},
                             {"seed", std::to_string(cfg.data_seed)},
                             {"config_hash", cfg.config_hash()},
                             {"data_hash", cfg.data_hash()},
                             {"n_train", std::to_string(d.train.size())},
                             {"n_test", std::to_string(d.test.size())},
                             {"feature_dim", std::to_string(cfg.feature_dim())},
                             {"channels", std::to_string(cfg.channels())}});
    log << "wrote " << d.train.size() << " train and " << d.test.size() << " test samples to "
        << root.string() << "\n";
    return kExitOk;
  });
}

int cmd_train(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    if (!opts.data) return usage_error(err, "train needs --data");
    if (!opts.out) return usage_error(err, "train needs --out");
    const fs::path data = *opts.data;
    if (!fs::exists(data / "manifest.txt")) {
      return usage_error(err, "no dataset at " + data.string());
    }
    RunConfig cfg = resolve_config(opts, data / "config.txt");
    if (opts.seed) set_config_value(cfg, "train.seed", std::to_string(*opts.seed));
    const dataset::Manifest manifest = dataset::read_manifest(data / "manifest.txt");
    if (manifest.count("data_hash") == 0 || manifest.at("data_hash") != cfg.data_hash()) {
      return usage_error(err, "configuration does not match the dataset (data_hash differs)");
    }
    const std::vector<synth::TrainingSample> samples = dataset::read_samples(data / "train");
    for (const auto& s : samples) {
      if (s.features.cols != cfg.feature_dim() || s.counts.counts.size() != cfg.channels()) {
        return usage_error(err, "dataset shape does not match the configuration");
      }
    }

    const fs::path out = *opts.out;
    ensure_dir(out);
    write_text(out / "config.txt", cfg.canonical());
    std::ofstream curve(out / "loss_curve.csv", std::ios::binary);
    if (!curve) return usage_error(err, "cannot write " + (out / "loss_curve.csv").string());
    curve << "# config_hash=" << cfg.config_hash() << " data_hash=" << cfg.data_hash() << "\n"
          << "epoch,mean_nll,count_mae\n";

    rnn::ModelParams params = initial_model(cfg);
    rnn::AdamState adam = rnn::make_adam(params, cfg.train.adam);
    auto save = [&](const fs::path& path, const rnn::ModelParams& p, const rnn::AdamState& a,
                    std::size_t epoch) {
      Checkpoint ck{p, a, artifact_meta(cfg)};
      ck.meta["epoch"] = std::to_string(epoch);
      write_checkpoint(path, ck);
    };

    const std::size_t every = cfg.train.checkpoint_every;
    try {
      train::fit(params, adam, samples, cfg.train, opts.threads,
                 [&](const train::EpochStats& s, const rnn::ModelParams& p,
                     const rnn::AdamState& a) {
                   curve << s.epoch << ',' << fmt(s.mean_nll) << ',' << fmt(s.count_mae) << '\n';
                   curve.flush();
                   log << "epoch " << s.epoch << " mean_nll " << short_fmt(s.mean_nll)
                       << " count_mae " << short_fmt(s.count_mae) << std::endl;
                   const bool periodic = every > 0 && s.epoch > 0 && s.epoch % every == 0;
                   if (periodic) {
                     char name[64];
                     std::snprintf(name, sizeof name, "ckpt_epoch_%04zu.ckpt", s.epoch);
                     save(out / name, p, a, s.epoch);
                   }
                   if (s.epoch == 0 || periodic || s.epoch == cfg.train.epochs) {
                     save(out / "model.ckpt", p, a, s.epoch);
                   }
                 });
    } catch (const TrainingDiverged& e) {
      err << "error: training diverged: " << e.what() << " (" << e.tensor() << "[" << e.index()
          << "] = " << e.value() << "); last good checkpoint kept in "
          << (out / "model.ckpt").string() << "\n";
      return kExitDiverged;
    }
    return kExitOk;
  });
}

int cmd_eval(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    if (!opts.data) return usage_error(err, "eval needs --data");
    if (!opts.checkpoint) return usage_error(err, "eval needs --checkpoint");
    const fs::path data = *opts.data;
    if (!fs::exists(data / "manifest.txt")) {
      return usage_error(err, "no dataset at " + data.string());
    }
    const Checkpoint ck = read_checkpoint(*opts.checkpoint);
    if (ck.meta.count("config") == 0) return usage_error(err, "checkpoint has no configuration");
    RunConfig cfg = parse_config(ck.meta.at("config"));
    if (opts.config) {
      // an explicit config may only change evaluation settings
      const RunConfig given = load_config(*opts.config);
      if (given.data_hash() != cfg.data_hash()) {
        return usage_error(err, "configuration does not match the checkpoint (data_hash differs)");
      }
      for (const auto& [key, value] : given.values) {
        if (key.rfind("eval.", 0) == 0) set_config_value(cfg, key, value);
      }
    }
    if (opts.tolerance) set_config_value(cfg, "eval.tolerance", std::to_string(*opts.tolerance));
    if (opts.threshold) set_config_value(cfg, "eval.threshold", fmt(*opts.threshold));

    const dataset::Manifest manifest = dataset::read_manifest(data / "manifest.txt");
    const auto it = manifest.find("data_hash");
    if (it == manifest.end() || ck.meta.count("data_hash") == 0 ||
        it->second != ck.meta.at("data_hash")) {
      return usage_error(err, "checkpoint was trained on a different dataset (data_hash differs)");
    }
    const std::vector<synth::TrainingSample> samples = dataset::read_samples(data / "test");
    const std::vector<synth::EventTruth> truth = dataset::read_truth(data / "test");
    const rnn::ModelDims dims = ck.params.dims();
    for (const auto& s : samples) {
      if (s.features.cols != dims.input || s.counts.counts.size() != dims.channels) {
        return usage_error(err, "dataset shape does not match the checkpoint");
      }
    }
    const EvalReport rep = run_eval(ck.params, samples, truth, cfg, opts.threads);

    const fs::path out = opts.out ? *opts.out : opts.checkpoint->parent_path();
    if (!out.empty()) ensure_dir(out);
    std::ostringstream csv;
    csv << "# config_hash=" << cfg.config_hash() << " data_hash=" << cfg.data_hash() << "\n";
    eval::write_metrics_csv(csv, rep.rows, rep.summary);
    write_text(out / "metrics.csv", csv.str());

    const auto& s = rep.summary;
    log << "samples " << rep.rows.size() << "\n"
        << "precision " << short_fmt(s.precision) << "\n"
        << "recall " << short_fmt(s.recall) << "\n"
        << "f1 " << short_fmt(s.f1) << "\n"
        << "count_accuracy " << short_fmt(rep.count_accuracy) << "\n";
    if (cfg.task == Task::kHilbert2d) {
      log << "mean_center_error_px " << short_fmt(rep.mean_center_error) << "\n";
    } else {
      log << "mean_signed_error " << short_fmt(rep.mean_signed_error) << "\n";
    }
    log << "sharp_event_fraction " << short_fmt(rep.sharp_event_fraction) << "\n"
        << "quiet_fraction " << short_fmt(rep.quiet_fraction) << "\n";
    return kExitOk;
  });
}

int cmd_props(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  props::Options po;
  if (opts.trials) {
    if (*opts.trials == 0) return usage_error(err, "--trials must be positive");
    po.trials = *opts.trials;
  }
  if (opts.seed) po.seed = *opts.seed;
  if (opts.inject_fault == "sign-flip") {
    po.pmf = props::faulty_pmf_sign_flip;
  } else if (!opts.inject_fault.empty()) {
    return usage_error(err, "unknown fault '" + opts.inject_fault + "'");
  }

  bool ok = true;
  for (const props::PropertyResult& r : props::run_all(po)) {
    log << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(34) << r.name
        << " worst=" << short_fmt(r.worst) << " tol=" << short_fmt(r.tolerance)
        << " slack=" << short_fmt(r.slack()) << "\n";
    if (!r.passed) {
      ok = false;
      err << "invariant violated: " << r.name << " (seed " << r.seed << ")\n";
    }
  }
  return ok ? kExitOk : kExitInvariant;
}

}  // namespace loco::cli
