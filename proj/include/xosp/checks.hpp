#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace xosp {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Numerical invariants: ladder balance, LP certificates, derivative
// identities, reference ratio table, magician open probability, demand oracle.
std::vector<CheckResult> run_invariant_checks(std::uint64_t seed);

// Reference ratio table for k = 2..11.
extern const double kTauTable[10];
extern const double kTauHatTable[10];

}  // namespace xosp
