// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. `--only 3,6` restricts the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "loco/commands.hpp"
#include "loco/hilbert.hpp"
#include "loco/loss.hpp"
#include "loco/pbd.hpp"
#include "loco/rnn.hpp"
#include "loco/train.hpp"

namespace fs = std::filesystem;
using namespace loco;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::vector<double> random_probs(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  for (double& x : p) x = u(rng);
  return p;
}

std::size_t randint(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Appends "name=value (op limit)" and folds the comparison into `o`.
void expect(Outcome& o, const std::string& name, double value, const char* op, double limit) {
  const bool ok = std::string(op) == "<=" ? value <= limit : value >= limit;
  o.pass = o.pass && ok;
  if (!o.detail.empty()) o.detail += " ";
  o.detail += name + "=" + num(value) + " (" + op + " " + num(limit) + ")";
}

Outcome oracle_equivalence() {
  Clock clock;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_probs(rng, randint(rng, 1, 12));
    const auto a = pbd::pmf(p), b = pbd::pmf_bruteforce(p);
    for (std::size_t k = 0; k < a.masses.size(); ++k) {
      worst = std::max(worst, std::abs(a.masses[k] - b.masses[k]));
    }
  }
  Outcome o;
  expect(o, "max_bin_error", worst, "<=", 1e-12);
  expect(o, "seconds", clock.seconds(), "<=", 10);
  return o;
}

Outcome gradient_exactness() {
  Clock clock;
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_probs(rng, randint(rng, 1, 12));
    const auto y = static_cast<long long>(randint(rng, 0, p.size()));
    const auto a = pbd::nll_grad(p, y, p.size()), b = pbd::grad_oracle(p, y);
    for (std::size_t t = 0; t < p.size(); ++t) worst = std::max(worst, std::abs(a[t] - b[t]));
  }
  double worst_rel = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 r(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    rnn::ModelParams params({3, 4, 1});
    for (double& v : params.values()) v = u(r);
    Matrix x(5, 3);
    for (double& v : x.data) v = 2.0 * u(r);
    const loss::CountLabel label{{static_cast<long long>(seed % 4)}};
    worst_rel = std::max(worst_rel, rnn::grad_check(params, x, label, 1e-5).max_rel_error);
  }
  Outcome o;
  expect(o, "oracle_abs_error", worst, "<=", 1e-12);
  expect(o, "gradcheck_rel_error", worst_rel, "<=", 1e-5);
  expect(o, "seconds", clock.seconds(), "<=", 60);
  return o;
}

Outcome distribution_invariants() {
  std::mt19937_64 rng(303);
  double rise = 0.0, drop = 0.0, over = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_probs(rng, randint(rng, 1, 200));
    const auto r = pbd::diagnostics(p);
    for (std::size_t t = 1; t < p.size(); ++t) {
      rise = std::max(rise, r.running_max[t] - r.running_max[t - 1]);
      drop = std::max(drop, r.variance_series[t - 1] - r.variance_series[t]);
    }
    over = std::max(over, r.running_max.back() - std::min(r.first_upper_bound, r.lecam_bound));
  }
  const auto sparse = pbd::diagnostics(std::vector<double>(100, 0.01));
  Outcome o;
  expect(o, "max_rise", rise, "<=", 1e-12);
  expect(o, "variance_drop", drop, "<=", 1e-12);
  expect(o, "bound_excess", over, "<=", 1e-12);
  expect(o, "lecam_example_error", std::abs(sparse.lecam_bound - (std::exp(-1.0) + 0.02)), "<=",
         1e-9);
  return o;
}

Outcome initialization() {
  double worst = 0.0;
  for (double omega : {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95}) {
    for (std::size_t len : {1, 2, 5, 10, 64, 100, 200, 300, 400}) {
      const double b = loss::init_bias(omega, len);
      const std::vector<double> p(len, 1.0 / (1.0 + std::exp(-b)));
      worst = std::max(worst, std::abs(pbd::pmf(p, 31).masses[0] - omega));
    }
  }
  Outcome o;
  expect(o, "max_zero_bin_error", worst, "<=", 1e-9);
  return o;
}

Outcome truncation() {
  std::mt19937_64 rng(505);
  double sum_err = 0.0, bin_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_probs(rng, randint(rng, 2, 200));
    const std::size_t k_max = randint(rng, 1, p.size() - 1);
    const auto cut = pbd::pmf(p, k_max), full = pbd::pmf(p);
    sum_err = std::max(sum_err,
                       std::abs(std::accumulate(cut.masses.begin(), cut.masses.end(), 0.0) - 1.0));
    for (std::size_t k = 0; k < k_max; ++k) {
      bin_err = std::max(bin_err, std::abs(cut.masses[k] - full.masses[k]));
    }
  }
  Outcome o;
  expect(o, "sum_error", sum_err, "<=", 1e-12);
  expect(o, "bin_error", bin_err, "<=", 1e-12);
  return o;
}

struct Trained {
  cli::EvalReport report;
  double seconds = 0.0;
};

Trained train_and_eval(const RunConfig& cfg) {
  Clock clock;
  const cli::Dataset data = cli::generate(cfg, 1);
  std::vector<synth::TrainingSample> train, test;
  std::vector<synth::EventTruth> truth;
  for (const auto& r : data.train) train.push_back(r.sample);
  for (const auto& r : data.test) {
    test.push_back(r.sample);
    truth.push_back(r.truth);
  }
  rnn::ModelParams params = cli::initial_model(cfg);
  rnn::AdamState adam = rnn::make_adam(params, cfg.train.adam);
  train::fit(params, adam, train, cfg.train, 1,
             [](const train::EpochStats& s, const rnn::ModelParams&, const rnn::AdamState&) {
               std::cerr << "  epoch " << s.epoch << " nll " << num(s.mean_nll) << "\n";
             });
  Trained t;
  t.report = cli::run_eval(params, test, truth, cfg, 1);
  t.seconds = clock.seconds();
  return t;
}

fs::path config_path(const char* name) { return fs::path(LOCO_SOURCE_DIR) / "configs" / name; }

std::optional<Trained> one_d;

const Trained& one_d_model() {
  if (!one_d) one_d = train_and_eval(load_config(config_path("synthetic_1d.cfg")));
  return *one_d;
}

Outcome end_to_end_1d() {
  const Trained& t = one_d_model();
  Outcome o;
  expect(o, "f1", t.report.summary.f1, ">=", 0.90);
  expect(o, "count_accuracy", t.report.count_accuracy, ">=", 0.90);
  expect(o, "seconds", t.seconds, "<=", 900);
  o.detail += " mean_signed_error=" + num(t.report.mean_signed_error);
  return o;
}

Outcome sharpness() {
  const Trained& t = one_d_model();
  Outcome o;
  expect(o, "sharp_events", t.report.sharp_event_fraction, ">=", 0.90);
  expect(o, "quiet_steps", t.report.quiet_fraction, ">=", 0.95);
  return o;
}

Outcome end_to_end_2d() {
  const RunConfig cfg = load_config(config_path("hilbert_2d.cfg"));
  const Trained t = train_and_eval(cfg);
  Outcome o;
  expect(o, "count_accuracy", t.report.count_accuracy, ">=", 0.85);
  expect(o, "center_error_px", t.report.mean_center_error, "<=", 1.5 * static_cast<double>(cfg.window));
  expect(o, "seconds", t.seconds, "<=", 1200);
  o.detail += " f1=" + num(t.report.summary.f1);
  return o;
}

Outcome hilbert_exhaustive() {
  Clock clock;
  std::size_t bad = 0;
  for (unsigned n = 0; n <= 6; ++n) {
    const std::uint64_t cells = std::uint64_t{1} << (2 * n);
    std::vector<char> seen(cells, 0);
    for (std::uint64_t d = 0; d < cells; ++d) {
      const hilbert::Cell c = hilbert::d2xy(n, d);
      const std::uint64_t slot = std::uint64_t{c.y} * (std::uint64_t{1} << n) + c.x;
      if (seen[slot]++ || hilbert::xy2d(n, c) != d) ++bad;
      if (d > 0) {
        const hilbert::Cell p = hilbert::d2xy(n, d - 1);
        const long dist = std::labs(long(c.x) - long(p.x)) + std::labs(long(c.y) - long(p.y));
        if (dist != 1) ++bad;
      }
    }
  }
  Outcome o;
  expect(o, "violations", static_cast<double>(bad), "<=", 0);
  expect(o, "seconds", clock.seconds(), "<=", 1);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / "loco_acceptance_repro";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "run.cfg";
  std::ofstream(cfg) << "[data]\nn_train = 200\nn_test = 20\n[train]\nepochs = 3\n"
                        "checkpoint_every = 1\n";
  std::ostringstream sink;
  cli::CommandOptions gen;
  gen.config = cfg;
  gen.out = root / "data";
  Outcome o;
  if (cli::cmd_gen(gen, sink, sink) != 0) return {false, "gen failed: " + sink.str()};
  for (const char* run : {"a", "b"}) {
    cli::CommandOptions tr;
    tr.config = cfg;
    tr.data = root / "data";
    tr.out = root / run;
    tr.seed = 42;
    if (cli::cmd_train(tr, sink, sink) != 0) return {false, "train failed: " + sink.str()};
  }
  std::size_t compared = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    ++compared;
    if (slurp(e.path()) != slurp(root / "b" / e.path().filename())) ++differing;
  }
  fs::remove_all(root);
  expect(o, "files_compared", static_cast<double>(compared), ">=", 6);
  expect(o, "files_differing", static_cast<double>(differing), "<=", 0);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: loco_acceptance [--only N[,N...]]\n";
      return 2;
    }
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"gradient exactness", gradient_exactness},
      {"distribution invariants", distribution_invariants},
      {"initialization", initialization},
      {"truncation", truncation},
      {"end-to-end 1D", end_to_end_1d},
      {"sharpness", sharpness},
      {"end-to-end 2D", end_to_end_2d},
      {"hilbert exhaustive", hilbert_exhaustive},
      {"reproducibility", reproducibility},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << id << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
