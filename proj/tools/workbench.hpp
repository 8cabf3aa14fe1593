#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "macl/corpus_stats.hpp"
#include "macl/losses.hpp"

namespace macl::workbench {

// Exit statuses of the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // numerical or assertion failure
inline constexpr int kExitUsage = 2;    // bad flags, missing or malformed input

/// Runs one CLI invocation; `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct GradcheckOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double step = 1e-5;
  double floor = 1e-9;
  std::size_t max_batch = 16;
  std::size_t max_dim = 8;
  std::size_t max_labels = 5;
};

struct GradcheckResult {
  std::size_t trials = 0;
  std::size_t anchors_checked = 0;
  double max_relative_error = 0.0;
  double max_decomposition_error = 0.0;  // |total - recomposed|, infinity norm
};

/// Analytic anchor gradients against central differences on seeded random
/// batches, cycling through every loss variant.
GradcheckResult run_gradcheck(const GradcheckOptions& options);

}  // namespace macl::workbench
