#include "loco/props.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "loco/hilbert.hpp"
#include "loco/loss.hpp"
#include "loco/synth.hpp"

namespace loco::props {
namespace {

constexpr double kFdStep = 1e-6;
constexpr double kFdFloor = 1e-3;

std::vector<double> random_probs(std::mt19937_64& rng, std::size_t n, double lo = 0.0,
                                 double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> p(n);
  for (double& v : p) v = u(rng);
  return p;
}

std::size_t random_len(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Collects the worst value of one property across trials.
class Tracker {
 public:
  Tracker(std::string name, double tolerance) {
    r_.name = std::move(name);
    r_.tolerance = tolerance;
  }
  void observe(double violation, std::uint64_t seed) {
    if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
    if (first_ || violation > r_.worst) {
      r_.worst = violation;
      r_.seed = seed;
      first_ = false;
    }
  }
  PropertyResult done() {
    r_.passed = r_.worst <= r_.tolerance;
    return r_;
  }

 private:
  PropertyResult r_;
  bool first_ = true;
};

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), kFdFloor});
}

}  // namespace

pbd::CountDistribution faulty_pmf_sign_flip(std::span<const double> p, std::size_t k_max) {
  const std::size_t kmax = std::min(k_max, p.size());
  std::vector<double> cur(kmax + 1, 0.0), next(kmax + 1, 0.0);
  cur[0] = 1.0;
  for (double pt : p) {
    next[0] = (1.0 - pt) * cur[0];
    for (std::size_t k = 1; k < kmax; ++k) next[k] = (1.0 - pt) * cur[k] - pt * cur[k - 1];
    next[kmax] = cur[kmax] + pt * cur[kmax - 1];
    cur.swap(next);
  }
  return {cur, kmax, kmax < p.size()};
}

std::vector<PropertyResult> run_all(const Options& opts) {
  const PmfFn pmf = opts.pmf ? opts.pmf : PmfFn([](std::span<const double> p, std::size_t k) {
    return pbd::pmf(p, k);
  });
  const std::size_t trials = opts.trials;
  std::vector<PropertyResult> out;
  std::uint64_t stream = 0;
  auto seed_of = [&](std::size_t trial) { return synth::derive_seed(opts.seed, stream, trial); };

  {  // subset enumeration agrees with the recursion
    ++stream;
    Tracker tr("oracle-equivalence", 1e-12);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      const auto p = random_probs(rng, random_len(rng, 1, 12));
      const auto fast = pmf(p, p.size());
      const auto slow = pbd::pmf_bruteforce(p);
      double worst = 0.0;
      for (std::size_t k = 0; k <= p.size(); ++k) {
        worst = std::max(worst, std::abs(fast.masses[k] - slow.masses[k]));
      }
      tr.observe(worst, seed_of(i));
    }
    out.push_back(tr.done());
  }

  {  // masses sum to one, truncated or not
    ++stream;
    Tracker tr("normalization", 1e-12);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      const auto p = random_probs(rng, random_len(rng, 1, 200));
      const std::size_t k_max = random_len(rng, 1, p.size());
      for (std::size_t k : {k_max, p.size()}) {
        const auto d = pmf(p, k);
        const double sum = std::accumulate(d.masses.begin(), d.masses.end(), 0.0);
        const double neg = -std::min(0.0, *std::min_element(d.masses.begin(), d.masses.end()));
        tr.observe(std::max(std::abs(sum - 1.0), neg), seed_of(i));
      }
    }
    out.push_back(tr.done());
  }

  {  // truncated bins agree with the full PMF; tail holds the rest
    ++stream;
    Tracker tr("truncation-consistency", 1e-12);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      const auto p = random_probs(rng, random_len(rng, 2, 200));
      const std::size_t k_max = random_len(rng, 1, p.size() - 1);
      const auto full = pmf(p, p.size());
      const auto cut = pmf(p, k_max);
      double worst = cut.truncated_tail && cut.masses.size() == k_max + 1 ? 0.0 : 1.0;
      for (std::size_t k = 0; k < k_max; ++k) {
        worst = std::max(worst, std::abs(full.masses[k] - cut.masses[k]));
      }
      const double tail = std::accumulate(full.masses.begin() + static_cast<std::ptrdiff_t>(k_max),
                                          full.masses.end(), 0.0);
      worst = std::max(worst, std::abs(tail - cut.masses[k_max]));
      tr.observe(worst, seed_of(i));
    }
    out.push_back(tr.done());
  }

  {  // the largest bin never grows as the prefix lengthens
    ++stream;
    Tracker tr("decreasing-maximum", 1e-12);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      const auto p = random_probs(rng, random_len(rng, 1, 200));
      const auto rep = pbd::diagnostics(p);
      double worst = -1.0;
      for (std::size_t t = 1; t < rep.running_max.size(); ++t) {
        worst = std::max(worst, rep.running_max[t] - rep.running_max[t - 1]);
      }
      tr.observe(std::max(worst, 0.0), seed_of(i));
    }
    out.push_back(tr.done());
  }

  {  // later prefixes stochastically dominate earlier ones
    ++stream;
    Tracker tr("monotone-counts", 1e-12);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      const auto p = random_probs(rng, random_len(rng, 1, 40));
      std::vector<double> prev_cdf{1.0};
      double worst = 0.0;
      for (std::size_t t = 1; t <= p.size(); ++t) {
        const auto d = pmf(std::span<const double>(p).first(t), t);
        std::vector<double> cdf(d.masses.size());
        std::partial_sum(d.masses.begin(), d.masses.end(), cdf.begin());
        for (std::size_t k = 0; k < cdf.size(); ++k) {
          const double before = k < prev_cdf.size() ? prev_cdf[k] : 1.0;
          worst = std::max(worst, cdf[k] - before);
        }
        prev_cdf = std::move(cdf);
      }
      tr.observe(worst, seed_of(i));
    }
    out.push_back(tr.done());
  }

  {  // both closed-form bounds dominate the final maximum
    ++stream;
    Tracker tr("bound-validity", 1e-12);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      // mix of dense and sparse sequences so the Poisson bound is exercised
      const double hi = std::uniform_int_distribution<int>(0, 1)(rng) ? 1.0 : 0.1;
      const auto p = random_probs(rng, random_len(rng, 1, 200), 0.0, hi);
      const auto rep = pbd::diagnostics(p);
      const double last = rep.running_max.back();
      tr.observe(std::max(last - rep.first_upper_bound, last - rep.lecam_bound), seed_of(i));
    }
    out.push_back(tr.done());
  }

  {  // NLL of any label is at least -log of the first upper bound
    ++stream;
    Tracker tr("loss-lower-bound", 1e-9);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      const auto p = random_probs(rng, random_len(rng, 1, 60));
      const double floor = -std::log(pbd::diagnostics(p).first_upper_bound);
      const auto d = pmf(p, p.size());
      double worst = -1.0;
      for (std::size_t y = 0; y <= p.size(); ++y) {
        const double value = -std::log(std::max(d.masses[y], pbd::kEpsMass));
        worst = std::max(worst, floor - value);
      }
      tr.observe(std::max(worst, 0.0), seed_of(i));
    }
    out.push_back(tr.done());
  }

  {  // variance grows by p(1-p) each step
    ++stream;
    Tracker inc("variance-increments", 1e-12);
    Tracker whole("variance-matches-pmf", 1e-10);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      const auto p = random_probs(rng, random_len(rng, 1, 60));
      const auto rep = pbd::diagnostics(p);
      double worst = 0.0;
      for (std::size_t t = 0; t < p.size(); ++t) {
        const double before = t ? rep.variance_series[t - 1] : 0.0;
        worst = std::max(worst, std::abs((rep.variance_series[t] - before) - p[t] * (1.0 - p[t])));
        if (rep.variance_series[t] < before) worst = 1.0;
      }
      inc.observe(worst, seed_of(i));
      const auto d = pmf(p, p.size());
      double mean = 0.0, second = 0.0;
      for (std::size_t k = 0; k < d.masses.size(); ++k) {
        mean += static_cast<double>(k) * d.masses[k];
        second += static_cast<double>(k * k) * d.masses[k];
      }
      whole.observe(std::abs((second - mean * mean) - rep.variance_series.back()), seed_of(i));
    }
    out.push_back(inc.done());
    out.push_back(whole.done());
  }

  {  // reverse sweep matches the leave-one-out oracle
    ++stream;
    Tracker tr("gradient-oracle", 1e-12);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      const auto p = random_probs(rng, random_len(rng, 1, 12), 0.05, 0.95);
      const auto y = static_cast<long long>(random_len(rng, 0, p.size()));
      const auto fast = pbd::nll_grad(p, y, p.size());
      const auto slow = pbd::grad_oracle(p, y);
      double worst = 0.0;
      for (std::size_t t = 0; t < p.size(); ++t) worst = std::max(worst, std::abs(fast[t] - slow[t]));
      tr.observe(worst, seed_of(i));
    }
    out.push_back(tr.done());
  }

  {  // reverse sweep matches central differences, truncated or not
    ++stream;
    Tracker tr("gradient-finite-difference", 1e-5);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      auto p = random_probs(rng, random_len(rng, 1, 30), 0.02, 0.98);
      const std::size_t k_max = random_len(rng, 1, p.size());
      const auto y = static_cast<long long>(random_len(rng, 0, k_max));
      const auto grad = pbd::nll_grad(p, y, k_max);
      double worst = 0.0;
      for (std::size_t t = 0; t < p.size(); ++t) {
        const double saved = p[t];
        p[t] = saved + kFdStep;
        const double up = pbd::nll(p, y, k_max);
        p[t] = saved - kFdStep;
        const double down = pbd::nll(p, y, k_max);
        p[t] = saved;
        worst = std::max(worst, rel_err(grad[t], (up - down) / (2.0 * kFdStep)));
      }
      tr.observe(worst, seed_of(i));
    }
    out.push_back(tr.done());
  }

  {  // order of the trials does not matter
    ++stream;
    Tracker tr("permutation-invariance", 1e-12);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      auto p = random_probs(rng, random_len(rng, 1, 100));
      const std::size_t k_max = random_len(rng, 1, p.size());
      const auto a = pmf(p, k_max);
      std::shuffle(p.begin(), p.end(), rng);
      const auto b = pmf(p, k_max);
      double worst = 0.0;
      for (std::size_t k = 0; k < a.masses.size(); ++k) {
        worst = std::max(worst, std::abs(a.masses[k] - b.masses[k]));
      }
      tr.observe(worst, seed_of(i));
    }
    out.push_back(tr.done());
  }

  {  // one-sample one-channel batch equals the plain NLL
    ++stream;
    Tracker tr("batch-single-equals-nll", 0.0);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      const auto p = random_probs(rng, random_len(rng, 1, 100));
      const std::size_t k_max = random_len(rng, 1, 40);
      const auto y = static_cast<long long>(random_len(rng, 0, p.size()));
      Matrix m(p.size(), 1);
      m.data = p;
      const loss::CountLabel label{{y}};
      const double batch = loss::batch_nll(std::span<const Matrix>(&m, 1),
                                           std::span<const loss::CountLabel>(&label, 1), k_max)
                               .report.total;
      tr.observe(std::abs(batch - pbd::nll(p, y, k_max)), seed_of(i));
    }
    out.push_back(tr.done());
  }

  {  // total is the sum of single-channel totals
    ++stream;
    Tracker tr("channel-decomposition", 1e-12);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      const std::size_t n = random_len(rng, 1, 4), channels = random_len(rng, 1, 3);
      std::vector<Matrix> probs;
      std::vector<loss::CountLabel> labels;
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t len = random_len(rng, 1, 50);
        Matrix m(len, channels);
        m.data = random_probs(rng, len * channels);
        probs.push_back(std::move(m));
        loss::CountLabel l;
        for (std::size_t c = 0; c < channels; ++c) {
          l.counts.push_back(static_cast<long long>(random_len(rng, 0, len)));
        }
        labels.push_back(std::move(l));
      }
      const double total = loss::batch_nll(probs, labels, 31).report.total;
      double split = 0.0;
      for (std::size_t c = 0; c < channels; ++c) {
        std::vector<Matrix> one;
        std::vector<loss::CountLabel> one_label;
        for (std::size_t s = 0; s < n; ++s) {
          Matrix m(probs[s].rows, 1);
          m.data = probs[s].column(c);
          one.push_back(std::move(m));
          one_label.push_back({{labels[s].counts[c]}});
        }
        split += loss::batch_nll(one, one_label, 31).report.total;
      }
      tr.observe(std::abs(total - split) / std::max(1.0, std::abs(total)), seed_of(i));
    }
    out.push_back(tr.done());
  }

  {  // the initial bias puts omega on the zero bin
    ++stream;
    Tracker tr("init-omega", 1e-9);
    for (double omega : {0.1, 0.3, 0.5, 0.9}) {
      for (std::size_t len : {1u, 10u, 100u, 400u}) {
        const double b = loss::init_bias(omega, len);
        const std::vector<double> p(len, 1.0 / (1.0 + std::exp(-b)));
        tr.observe(std::abs(pmf(p, 31).masses[0] - omega), 0);
      }
    }
    out.push_back(tr.done());
  }

  {  // batch gradient matches central differences
    ++stream;
    Tracker tr("batch-gradient-finite-difference", 1e-5);
    for (std::size_t i = 0; i < trials; ++i) {
      std::mt19937_64 rng(seed_of(i));
      const std::size_t n = random_len(rng, 1, 3), channels = random_len(rng, 1, 2);
      std::vector<Matrix> probs;
      std::vector<loss::CountLabel> labels;
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t len = random_len(rng, 1, 20);
        Matrix m(len, channels);
        m.data = random_probs(rng, len * channels, 0.02, 0.98);
        probs.push_back(std::move(m));
        loss::CountLabel l;
        for (std::size_t c = 0; c < channels; ++c) {
          l.counts.push_back(static_cast<long long>(random_len(rng, 0, len)));
        }
        labels.push_back(std::move(l));
      }
      const std::size_t k_max = random_len(rng, 1, 20);
      const auto bl = loss::batch_nll(probs, labels, k_max, true);
      double worst = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t e = 0; e < probs[s].data.size(); ++e) {
          const double saved = probs[s].data[e];
          probs[s].data[e] = saved + kFdStep;
          const double up = loss::batch_nll(probs, labels, k_max).report.total;
          probs[s].data[e] = saved - kFdStep;
          const double down = loss::batch_nll(probs, labels, k_max).report.total;
          probs[s].data[e] = saved;
          worst = std::max(worst, rel_err(bl.grads[s].data[e], (up - down) / (2.0 * kFdStep)));
        }
      }
      tr.observe(worst, seed_of(i));
    }
    out.push_back(tr.done());
  }

  {  // index <-> cell is a bijection for every order up to 6
    ++stream;
    Tracker tr("hilbert-bijection", 0.0);
    for (unsigned n = 0; n <= 6; ++n) {
      const std::uint64_t cells = std::uint64_t{1} << (2 * n);
      std::vector<bool> seen(cells, false);
      double bad = 0.0;
      for (std::uint64_t d = 0; d < cells; ++d) {
        const hilbert::Cell c = hilbert::d2xy(n, d);
        const std::uint64_t slot = std::uint64_t{c.y} * (std::uint64_t{1} << n) + c.x;
        if (seen[slot] || hilbert::xy2d(n, c) != d) bad += 1.0;
        seen[slot] = true;
      }
      tr.observe(bad, n);
    }
    out.push_back(tr.done());
  }

  {  // consecutive indices are 4-neighbours
    ++stream;
    Tracker tr("hilbert-adjacency", 0.0);
    for (unsigned n = 1; n <= 6; ++n) {
      const std::uint64_t cells = std::uint64_t{1} << (2 * n);
      double bad = 0.0;
      for (std::uint64_t d = 1; d < cells; ++d) {
        const hilbert::Cell a = hilbert::d2xy(n, d - 1), b = hilbert::d2xy(n, d);
        const auto dist = std::abs(static_cast<long long>(a.x) - b.x) +
                          std::abs(static_cast<long long>(a.y) - b.y);
        if (dist != 1) bad += 1.0;
      }
      tr.observe(bad, n);
    }
    out.push_back(tr.done());
  }

  {  // windows tile the padded image with no overlap or gap
    ++stream;
    Tracker tr("scan-lossless", 0.0);
    for (std::size_t i = 0; i < std::min<std::size_t>(trials, 100); ++i) {
      std::mt19937_64 rng(seed_of(i));
      const std::size_t w = random_len(rng, 1, 4), h = random_len(rng, 1, 4);
      const std::size_t depth = random_len(rng, 1, 2);
      hilbert::Image img(random_len(rng, 1, 20), random_len(rng, 1, 20), depth);
      for (double& v : img.pixels) v = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
      const hilbert::HilbertCurve curve = hilbert::curve_for(img, w, h);
      const hilbert::ScanResult scan = hilbert::scan_image(img, curve);
      hilbert::Image back(scan.padded_width, scan.padded_height, depth);
      std::vector<int> hits(back.pixels.size(), 0);
      for (std::size_t d = 0; d < curve.length(); ++d) {
        const hilbert::Cell cell = hilbert::d2xy(curve.order, d);
        std::size_t k = 0;
        for (std::size_t wy = 0; wy < h; ++wy) {
          for (std::size_t wx = 0; wx < w; ++wx) {
            for (std::size_t c = 0; c < depth; ++c, ++k) {
              const std::size_t x = cell.x * w + wx, y = cell.y * h + wy;
              back.at(x, y, c) = scan.sequence(d, k);
              ++hits[(y * back.width + x) * depth + c];
            }
          }
        }
      }
      double bad = 0.0;
      for (int hcount : hits) bad += hcount == 1 ? 0.0 : 1.0;
      for (std::size_t y = 0; y < back.height; ++y) {
        for (std::size_t x = 0; x < back.width; ++x) {
          for (std::size_t c = 0; c < depth; ++c) {
            const double want = x < img.width && y < img.height ? img.at(x, y, c) : 0.0;
            if (back.at(x, y, c) != want) bad += 1.0;
          }
        }
      }
      tr.observe(bad, seed_of(i));
    }
    out.push_back(tr.done());
  }
  return out;
}

}  // namespace loco::props
