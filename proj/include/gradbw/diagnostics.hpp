#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gradbw {

struct CheckResult
{
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fourier identity, gradient link on a quadratic and on the clustering distortion,
/// finite-difference gradients, and the local regression margin.
std::vector<CheckResult> run_diagnostics(std::uint64_t seed = 1, std::size_t grid = 64);

/// Prints one line per check; true when all pass.
bool report_diagnostics(const std::vector<CheckResult>& results, std::ostream& os);

} // namespace gradbw
