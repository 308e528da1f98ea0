#pragma once

#include <string>
#include <vector>

namespace qaction {

struct VerifyEntry {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyEntry> entries;
  bool all_pass() const;
  /// Fixed-width pass/fail table; no timings, so repeated runs print the same text.
  std::string table() const;
};

/// Fast subset of the acceptance checks: Bessel oracle, Chapman-Kolmogorov,
/// eigenfunction property, scales, harmonic fit round trip, transformation
/// law, integrable-limit Lyapunov exponent.
VerifyReport verify();

}  // namespace qaction
