// Subset-enumeration references for the forward recursion and its gradient.
// Deliberately share no code with pbd.cpp.

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "loco/error.hpp"
#include "loco/pbd.hpp"

namespace loco::pbd {
namespace {

std::vector<double> enumerate_subsets(std::span<const double> p) {
  const std::size_t n = p.size();
  std::vector<double> masses(n + 1, 0.0);
  const std::uint32_t subsets = std::uint32_t{1} << n;
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    double prod = 1.0;
    for (std::size_t j = 0; j < n; ++j) prod *= (mask >> j) & 1u ? p[j] : 1.0 - p[j];
    masses[std::popcount(mask)] += prod;
  }
  return masses;
}

void check_oracle_input(std::span<const double> p) {
  if (p.empty()) throw InvalidInput("probability sequence is empty");
  if (p.size() > kMaxOracleLength) {
    throw SizeError("subset enumeration refuses T=" + std::to_string(p.size()) + " (limit " +
                    std::to_string(kMaxOracleLength) + ")");
  }
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw InvalidInput("probability outside [0,1]");
  }
}

}  // namespace

CountDistribution pmf_bruteforce(std::span<const double> p) {
  check_oracle_input(p);
  return CountDistribution{enumerate_subsets(p), p.size(), false};
}

std::vector<double> grad_oracle(std::span<const double> p, long long y) {
  check_oracle_input(p);
  if (y < 0) throw InvalidInput("count label must be nonnegative");
  const std::size_t n = p.size();
  const auto label = static_cast<std::size_t>(y);
  std::vector<double> grad(n, 0.0);
  const std::vector<double> full = enumerate_subsets(p);
  const double mass = label <= n ? full[label] : 0.0;
  if (mass < kEpsMass) return grad;

  std::vector<double> rest;
  rest.reserve(n - 1);
  for (std::size_t t = 0; t < n; ++t) {
    rest.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != t) rest.push_back(p[j]);
    }
    const std::vector<double> loo = enumerate_subsets(rest);
    const double below = label >= 1 && label - 1 < loo.size() ? loo[label - 1] : 0.0;
    const double at = label < loo.size() ? loo[label] : 0.0;
    grad[t] = -(below - at) / mass;
  }
  return grad;
}

}  // namespace loco::pbd
