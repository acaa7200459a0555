#pragma once

// Randomized invariant suites for the count distribution, the batch loss and
// the Hilbert scan. Shared by the `props` subcommand and the test suites.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "loco/pbd.hpp"

namespace loco::props {

using PmfFn = std::function<pbd::CountDistribution(std::span<const double>, std::size_t)>;

struct PropertyResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;      // largest observed violation measure
  double tolerance = 0.0;  // allowed value of `worst`
  std::uint64_t seed = 0;  // trial seed that produced `worst`
  std::string detail;

  double slack() const { return tolerance - worst; }
};

struct Options {
  std::uint64_t seed = 1;
  std::size_t trials = 1000;
  /// Implementation under test; defaults to pbd::pmf.
  PmfFn pmf;
};

/// Recursion with the sign of the shift term flipped. Only for checking that
/// the suite catches a broken implementation.
pbd::CountDistribution faulty_pmf_sign_flip(std::span<const double> p, std::size_t k_max);

std::vector<PropertyResult> run_all(const Options& opts);

}  // namespace loco::props
