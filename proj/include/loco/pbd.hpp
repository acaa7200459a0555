#pragma once

// Poisson-binomial count distribution of a sequence of independent
// Bernoulli trials: exact PMF by the forward recursion over (count, time),
// its reverse-mode derivative, and the diagnostic upper bounds on the
// largest bin.

#include <cstddef>
#include <span>
#include <vector>

namespace loco::pbd {

/// Floor applied to the label-bin mass before taking its log.
inline constexpr double kEpsMass = 1e-12;

/// PMF of the count over bins 0..k_max. When `truncated_tail` is set the last
/// bin holds Pr(Y >= k_max); otherwise k_max equals the sequence length and
/// the bins are the full PMF.
struct CountDistribution {
  std::vector<double> masses;
  std::size_t k_max = 0;
  bool truncated_tail = false;

  double operator[](std::size_t k) const { return masses[k]; }
};

struct DiagnosticsReport {
  std::vector<double> running_max;  // max_k Pr(Y(t) = k) for each prefix t
  double first_upper_bound = 0.0;   // 1/2 + min_j |1/2 - p(j)|
  double lecam_bound = 0.0;         // Poisson-approximation bound, best ascending prefix
  std::vector<double> variance_series;  // Var Y(t) = sum_{j<=t} p(j)(1-p(j))
};

/// Forward recursion; complexity O(k_max * T). k_max larger than T is
/// treated as T (untruncated).
CountDistribution pmf(std::span<const double> p, std::size_t k_max);

/// Untruncated PMF (k_max = T).
CountDistribution pmf(std::span<const double> p);

/// -log Pr(Y = min(y, k_max)) with the mass floored at kEpsMass.
double nll(std::span<const double> p, long long y, std::size_t k_max);

struct NllWithGrad {
  double value = 0.0;
  std::vector<double> grad;  // d value / d p(t)
};

/// Value and gradient in one pass: forward table, then a backward sweep.
NllWithGrad nll_and_grad(std::span<const double> p, long long y, std::size_t k_max);

/// d nll / d p(t) for every t.
std::vector<double> nll_grad(std::span<const double> p, long long y, std::size_t k_max);

DiagnosticsReport diagnostics(std::span<const double> p);

// Exponential-time references, T <= kMaxOracleLength.

inline constexpr std::size_t kMaxOracleLength = 20;

/// Sum over all subsets of each size; refuses T > 20.
CountDistribution pmf_bruteforce(std::span<const double> p);

/// Exact NLL gradient from leave-one-out PMFs:
/// d Pr(Y=y)/d p(t) = Q_{-t}(y-1) - Q_{-t}(y).
std::vector<double> grad_oracle(std::span<const double> p, long long y);

}  // namespace loco::pbd
