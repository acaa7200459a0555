#include "loco/pbd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loco/error.hpp"
#include "loco/kernels.hpp"

namespace loco::pbd {
namespace {

void validate(std::span<const double> p) {
  if (p.empty()) throw InvalidInput("probability sequence is empty");
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (!std::isfinite(p[t]) || p[t] < 0.0 || p[t] > 1.0) {
      throw InvalidInput("probability at index " + std::to_string(t) +
                         " is not a finite value in [0,1]");
    }
  }
}

std::size_t effective_bins(std::span<const double> p, std::size_t k_max) {
  if (k_max == 0) throw InvalidInput("k_max must be at least 1");
  return std::min(k_max, p.size());
}

/// Forward table, (T+1) rows of `bins` columns; row t holds Pr(Y(t) = k).
std::vector<double> forward_table(std::span<const double> p, std::size_t bins) {
  const auto& kt = kernels::active();
  std::vector<double> table((p.size() + 1) * bins, 0.0);
  table[0] = 1.0;
  for (std::size_t t = 0; t < p.size(); ++t) {
    kt.pbd_forward_step(table.data() + t * bins, table.data() + (t + 1) * bins, bins, p[t]);
  }
  return table;
}

}  // namespace

CountDistribution pmf(std::span<const double> p, std::size_t k_max) {
  validate(p);
  const std::size_t kmax = effective_bins(p, k_max);
  const std::size_t bins = kmax + 1;
  const auto& kt = kernels::active();
  std::vector<double> cur(bins, 0.0), next(bins, 0.0);
  cur[0] = 1.0;
  for (double pt : p) {
    kt.pbd_forward_step(cur.data(), next.data(), bins, pt);
    cur.swap(next);
  }
  return CountDistribution{std::move(cur), kmax, kmax < p.size()};
}

CountDistribution pmf(std::span<const double> p) { return pmf(p, p.size()); }

double nll(std::span<const double> p, long long y, std::size_t k_max) {
  if (y < 0) throw InvalidInput("count label must be nonnegative");
  const CountDistribution dist = pmf(p, k_max);
  const auto bin = std::min(static_cast<std::size_t>(y), dist.k_max);
  return -std::log(std::max(dist.masses[bin], kEpsMass));
}

NllWithGrad nll_and_grad(std::span<const double> p, long long y, std::size_t k_max) {
  if (y < 0) throw InvalidInput("count label must be nonnegative");
  validate(p);
  const std::size_t kmax = effective_bins(p, k_max);
  const std::size_t bins = kmax + 1;
  const std::size_t steps = p.size();
  const std::vector<double> table = forward_table(p, bins);

  const std::size_t label = std::min(static_cast<std::size_t>(y), kmax);
  const double mass = table[steps * bins + label];

  NllWithGrad out;
  out.grad.assign(steps, 0.0);
  if (mass < kEpsMass) {
    // floor is active: value is constant in p locally
    out.value = -std::log(kEpsMass);
    return out;
  }
  out.value = -std::log(mass);

  const auto& kt = kernels::active();
  std::vector<double> grad(bins, 0.0), grad_prev(bins, 0.0);
  grad[label] = -1.0 / mass;
  for (std::size_t t = steps; t-- > 0;) {
    out.grad[t] =
        kt.pbd_backward_step(table.data() + t * bins, grad.data(), grad_prev.data(), bins, p[t]);
    grad.swap(grad_prev);
  }
  return out;
}

std::vector<double> nll_grad(std::span<const double> p, long long y, std::size_t k_max) {
  return nll_and_grad(p, y, k_max).grad;
}

DiagnosticsReport diagnostics(std::span<const double> p) {
  validate(p);
  const std::size_t steps = p.size();
  const std::size_t bins = steps + 1;
  const auto& kt = kernels::active();

  DiagnosticsReport report;
  report.running_max.reserve(steps);
  report.variance_series.reserve(steps);

  std::vector<double> cur(bins, 0.0), next(bins, 0.0);
  cur[0] = 1.0;
  double variance = 0.0;
  double closest_to_half = 0.5;
  for (std::size_t t = 0; t < steps; ++t) {
    kt.pbd_forward_step(cur.data(), next.data(), bins, p[t]);
    cur.swap(next);
    report.running_max.push_back(*std::max_element(cur.begin(), cur.begin() + t + 2));
    variance += p[t] * (1.0 - p[t]);
    report.variance_series.push_back(variance);
    closest_to_half = std::min(closest_to_half, std::abs(0.5 - p[t]));
  }
  report.first_upper_bound = 0.5 + closest_to_half;

  std::vector<double> sorted(p.begin(), p.end());
  std::sort(sorted.begin(), sorted.end());
  double lambda = 0.0;
  double squares = 0.0;
  double best = 1.0;
  for (double v : sorted) {
    lambda += v;
    squares += v * v;
    const double mode = std::floor(lambda);
    const double poisson_max =
        lambda > 0.0 ? std::exp(mode * std::log(lambda) - lambda - std::lgamma(mode + 1.0)) : 1.0;
    best = std::min(best, poisson_max + 2.0 * squares);
  }
  report.lecam_bound = best;
  return report;
}

}  // namespace loco::pbd
