#pragma once

// Property suites behind the verify-lemma and check-ops commands. Each failure is
// reported as one JSON line.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace vw {

struct SuiteReport {
  std::size_t checks = 0;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

using LineSink = std::function<void(const std::string&)>;

struct LemmaSuiteOptions {
  int samples = 1000;
  std::uint64_t seed = 0;
  /// Exact rational determinants; otherwise floating point at relative 1e-8.
  bool exact = true;
  /// Test hook: "det-formula" perturbs the closed form.
  std::string fault;
};

/// Determinant identity on rational tuples, kernel classification with exact
/// null vectors, and basis-change invariance for rotated B.
SuiteReport run_lemma_suite(const LemmaSuiteOptions& opts, const LineSink& on_failure = {});

struct OpsSuiteOptions {
  std::array<int, 4> dims{3, 3, 3, 3};
  double h = 1.0;
  std::uint64_t seed = 0;
  int trials = 5;
  /// Test hook: "transpose" perturbs the adjoint of dF.
  std::string fault;
};

/// Linearization, adjointness, equivariance, d+ d = 0 and dimension checks.
SuiteReport run_ops_suite(const OpsSuiteOptions& opts, const LineSink& on_failure = {});

}  // namespace vw
