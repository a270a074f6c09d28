#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "xosp/core_model.hpp"
#include "xosp/lp_core.hpp"

namespace xosp {

// Raised when an exact computation would exceed its size cap.
class CapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The LP enumerates every bundle, so the item count is capped.
constexpr int kMaxExAnteItems = 12;
// Work cap for exact hindsight optimization.
constexpr std::uint64_t kHindsightCap = std::uint64_t{1} << 24;

struct SetMass {
  ItemSet set;
  double mass;  // x_{i,v,S}
};

struct ExAnteSolution {
  double objective = 0;
  // x[i][a] = nonzero (S, x_{i,a,S}) pairs, S nonempty.
  std::vector<std::vector<std::vector<SetMass>>> x;
  // Expected welfare attributed to each item through supporting clauses.
  std::vector<double> item_welfare;
  // z[i][j] = Pr[buyer i is assigned a bundle containing j].
  std::vector<std::vector<double>> z;
  LpSolution lp;

  // Total ex-ante mass on item j, sum_i z[i][j].
  double item_mass(int j) const;
};

ExAnteSolution solve_ex_ante(const Instance& inst);

// Recomputes item welfare and z from x.
void fill_derived(const Instance& inst, ExAnteSolution& sol);

// Uniformly scales every x entry (and derived quantities).
ExAnteSolution scaled(const Instance& inst, const ExAnteSolution& sol, double factor);

struct HindsightResult {
  double welfare = 0;
  std::vector<ItemSet> allocation;  // per buyer
};

// Exact welfare-optimal integral allocation for a realized profile.
// Throws CapError beyond kHindsightCap work.
HindsightResult hindsight_opt(const Instance& inst, const Profile& profile);

// Same, specialised to unit-demand realized valuations (min-cost flow).
HindsightResult hindsight_opt_unit_demand(const Instance& inst, const Profile& profile);

struct ProphetOptions {
  int samples = 1000;
  std::uint64_t seed = 0;
  // Buyers whose atoms are enumerated exactly rather than sampled.
  std::vector<int> enumerated_buyers;
};

struct ProphetEstimate {
  double mean = 0;
  double std_error = 0;
  int samples = 0;
};

ProphetEstimate prophet_benchmark(const Instance& inst, const ProphetOptions& opts);

}  // namespace xosp
