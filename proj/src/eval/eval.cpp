#include "loco/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <tuple>

#include "loco/error.hpp"
#include "loco/pbd.hpp"

namespace loco::eval {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    if constexpr (std::is_floating_point_v<T>) {
      s += fmt(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

struct Candidate {
  double distance;
  double position;  // secondary key; pred + truth keeps the order symmetric in 1D
  std::size_t pred;
  std::size_t truth;
  double error;
};

MatchResult greedy(std::vector<Candidate> cands, std::size_t n_pred, std::size_t n_truth) {
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.distance, a.position, a.pred, a.truth) <
           std::tie(b.distance, b.position, b.pred, b.truth);
  });
  std::vector<bool> pred_used(n_pred, false), truth_used(n_truth, false);
  std::vector<std::pair<std::size_t, double>> matched;  // (truth index, error)
  for (const Candidate& c : cands) {
    if (pred_used[c.pred] || truth_used[c.truth]) continue;
    pred_used[c.pred] = truth_used[c.truth] = true;
    matched.emplace_back(c.truth, c.error);
  }
  std::sort(matched.begin(), matched.end());
  MatchResult r;
  r.tp = matched.size();
  r.fp = n_pred - r.tp;
  r.fn = n_truth - r.tp;
  for (const auto& m : matched) r.errors.push_back(m.second);
  finalize(r);
  return r;
}

}  // namespace

std::vector<std::size_t> decode(std::span<const double> p, double threshold,
                                std::size_t min_separation) {
  const std::size_t n = p.size();
  std::vector<std::size_t> peaks;
  for (std::size_t t = 0; t < n; ++t) {
    if (p[t] < threshold) continue;
    if (t > 0 && p[t - 1] > p[t]) continue;
    if (t + 1 < n && p[t + 1] > p[t]) continue;
    peaks.push_back(t);
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t t : peaks) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](std::size_t u) {
      return (t > u ? t - u : u - t) >= min_separation;
    });
    if (clear) kept.push_back(t);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

DecodedEvents decode_all(const Matrix& probs, double threshold, std::size_t min_separation,
                         std::size_t k_max) {
  DecodedEvents out;
  for (std::size_t c = 0; c < probs.cols; ++c) {
    const std::vector<double> seq = probs.column(c);
    out.events.push_back(decode(seq, threshold, min_separation));
    double expected = 0.0;
    for (double v : seq) expected += v;
    out.expected_count.push_back(expected);
    const pbd::CountDistribution dist = pbd::pmf(seq, k_max);
    out.modal_count.push_back(static_cast<std::size_t>(
        std::max_element(dist.masses.begin(), dist.masses.end()) - dist.masses.begin()));
  }
  return out;
}

void finalize(MatchResult& r) {
  r.precision = r.tp + r.fp == 0 ? 1.0 : static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
  r.recall = r.tp + r.fn == 0 ? 1.0 : static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  const double s = r.precision + r.recall;
  r.f1 = s == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / s;
}

MatchResult match(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                  std::size_t tolerance) {
  std::vector<Candidate> cands;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    while (lo < truth.size() && truth[lo] + tolerance < pred[i]) ++lo;
    for (std::size_t j = lo; j < truth.size() && truth[j] <= pred[i] + tolerance; ++j) {
      const double err = static_cast<double>(pred[i]) - static_cast<double>(truth[j]);
      cands.push_back({std::abs(err), static_cast<double>(pred[i] + truth[j]), i, j, err});
    }
  }
  return greedy(std::move(cands), pred.size(), truth.size());
}

MatchResult match_points(std::span<const Point> pred, std::span<const Point> truth, double radius) {
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const double d = std::hypot(pred[i].first - truth[j].first, pred[i].second - truth[j].second);
      if (d <= radius) cands.push_back({d, 0.0, i, j, d});
    }
  }
  return greedy(std::move(cands), pred.size(), truth.size());
}

MatchResult combine(std::span<const MatchResult> parts) {
  MatchResult r;
  for (const MatchResult& m : parts) {
    r.tp += m.tp;
    r.fp += m.fp;
    r.fn += m.fn;
    r.errors.insert(r.errors.end(), m.errors.begin(), m.errors.end());
  }
  finalize(r);
  return r;
}

Summary aggregate(std::span<const MatchResult> results, Averaging mode) {
  if (results.empty()) throw InvalidInput("aggregate needs at least one result");
  const MatchResult pooled = combine(results);
  Summary s;
  s.tp = pooled.tp;
  s.fp = pooled.fp;
  s.fn = pooled.fn;
  if (mode == Averaging::kMicro) {
    s.precision = pooled.precision;
    s.recall = pooled.recall;
    s.f1 = pooled.f1;
  } else {
    double p = 0.0, r = 0.0, f = 0.0;
    for (const MatchResult& m : results) {
      p += m.precision;
      r += m.recall;
      f += m.f1;
    }
    const double n = static_cast<double>(results.size());
    s.precision = p / n;
    s.recall = r / n;
    s.f1 = f / n;
  }
  s.matched = pooled.errors.size();
  if (s.matched > 0) {
    double sum = 0.0;
    for (double e : pooled.errors) sum += e;
    s.mean_error = sum / static_cast<double>(s.matched);
    double sq = 0.0;
    for (double e : pooled.errors) sq += (e - s.mean_error) * (e - s.mean_error);
    s.std_error = std::sqrt(sq / static_cast<double>(s.matched));
  }
  return s;
}

double count_accuracy(std::span<const SampleMetrics> rows) {
  std::size_t total = 0, correct = 0;
  for (const SampleMetrics& r : rows) {
    for (std::size_t c = 0; c < r.label.size(); ++c) {
      ++total;
      if (static_cast<long long>(r.modal[c]) == r.label[c]) ++correct;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
}

void write_metrics_csv(std::ostream& out, std::span<const SampleMetrics> rows,
                       const Summary& summary) {
  out << "id,tp,fp,fn,precision,recall,f1,mean_error,label_counts,modal_counts,expected_counts,"
         "count_correct\n";
  for (const SampleMetrics& r : rows) {
    double mean = 0.0;
    for (double e : r.match.errors) mean += e;
    if (!r.match.errors.empty()) mean /= static_cast<double>(r.match.errors.size());
    std::size_t correct = 0;
    for (std::size_t c = 0; c < r.label.size(); ++c) {
      if (static_cast<long long>(r.modal[c]) == r.label[c]) ++correct;
    }
    out << r.id << ',' << r.match.tp << ',' << r.match.fp << ',' << r.match.fn << ','
        << fmt(r.match.precision) << ',' << fmt(r.match.recall) << ',' << fmt(r.match.f1) << ','
        << fmt(mean) << ',' << join(r.label) << ',' << join(r.modal) << ',' << join(r.expected)
        << ',' << correct << '/' << r.label.size() << '\n';
  }
  out << "summary," << summary.tp << ',' << summary.fp << ',' << summary.fn << ','
      << fmt(summary.precision) << ',' << fmt(summary.recall) << ',' << fmt(summary.f1) << ','
      << fmt(summary.mean_error) << ",,,," << fmt(count_accuracy(rows)) << '\n';
}

}  // namespace loco::eval
