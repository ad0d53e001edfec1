#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace scrbm::cli {

struct SuiteResult {
  std::string name;
  std::size_t trials = 0;
  double max_error = 0.0;
  double threshold = 0.0;
  double seconds = 0.0;
  bool passed() const { return max_error < threshold; }
};

/// Test hook: corrupt the analytic side so the harness must notice.
enum class FaultInjection { None, SignFlip };

// Analytic BPTT vs central differences (eps 1e-5) on random tiny models with
// M<=5, N<=6, K<=4, T<=6. Error is max relative error per component.
SuiteResult run_gradcheck(std::size_t trials, std::uint64_t seed,
                          FaultInjection fault = FaultInjection::None);
SuiteResult run_rnn_gradcheck(std::size_t trials, std::uint64_t seed,
                              FaultInjection fault = FaultInjection::None);

// Free-energy posterior vs exhaustive hidden marginalization, N<=10; sup-norm.
SuiteResult run_oracle_suite(std::size_t trials, std::uint64_t seed);

// |sum over all label sequences of the factored conditional - 1|, K=3, T<=5.
SuiteResult run_normalization_suite(std::size_t trials, std::uint64_t seed);

}  // namespace scrbm::cli
