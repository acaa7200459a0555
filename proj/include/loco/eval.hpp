#pragma once

// Peak decoding of probability sequences and tolerance-window scoring
// against hidden event times.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loco/matrix.hpp"

namespace loco::eval {

/// Local maxima of p at or above `threshold`, greedily kept from the largest
/// down (earlier index wins ties) and suppressed within `min_separation - 1`
/// steps of an already kept one. Returned in increasing order.
std::vector<std::size_t> decode(std::span<const double> p, double threshold,
                                std::size_t min_separation);

struct DecodedEvents {
  std::vector<std::vector<std::size_t>> events;  // per channel
  std::vector<double> expected_count;            // sum_t p(t)
  std::vector<std::size_t> modal_count;          // argmax of the count PMF
};

DecodedEvents decode_all(const Matrix& probs, double threshold, std::size_t min_separation,
                         std::size_t k_max);

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  /// predicted - true for each matched pair (Euclidean distance for points).
  std::vector<double> errors;
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
};

/// Fills precision/recall/f1 from tp/fp/fn: empty denominators give 1 for
/// precision and recall, and an f1 of 0 when precision + recall is 0.
void finalize(MatchResult& r);

/// Greedy one-to-one matching in order of increasing |offset|; pairs farther
/// apart than `tolerance` never match. Inputs must be sorted.
MatchResult match(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                  std::size_t tolerance);

using Point = std::pair<double, double>;

/// Same rule on 2D points with Euclidean distance and a radius.
MatchResult match_points(std::span<const Point> pred, std::span<const Point> truth, double radius);

/// Pooled counts of several results.
MatchResult combine(std::span<const MatchResult> parts);

enum class Averaging { kMicro, kMacro };

struct Summary {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 1.0, recall = 1.0, f1 = 1.0;
  double mean_error = 0.0;
  double std_error = 0.0;  // population standard deviation
  std::size_t matched = 0;
};

/// kMicro pools tp/fp/fn before taking ratios; kMacro averages the
/// per-result ratios. Errors are always pooled.
Summary aggregate(std::span<const MatchResult> results, Averaging mode = Averaging::kMicro);

/// One metrics row per evaluated sample.
struct SampleMetrics {
  std::size_t id = 0;
  MatchResult match;                 // channels pooled
  std::vector<long long> label;      // true counts
  std::vector<std::size_t> modal;    // modal predicted counts
  std::vector<double> expected;      // expected predicted counts
};

/// Fraction of (sample, channel) pairs whose modal count equals the label.
double count_accuracy(std::span<const SampleMetrics> rows);

/// CSV columns: id,tp,fp,fn,precision,recall,f1,mean_error,label_counts,
/// modal_counts,expected_counts,count_correct. Count lists are ';'-joined.
/// The final row has id "summary" and carries the aggregate.
void write_metrics_csv(std::ostream& out, std::span<const SampleMetrics> rows,
                       const Summary& summary);

}  // namespace loco::eval
