#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xosp/core_model.hpp"

namespace xosp {

// n small buyers with values on a grid over [1, 1+eps] plus one large buyer
// worth U/eps with probability eps. Buyers 0..n-1 small, buyer n large.
struct SingleItemHardParams {
  int k = 1;
  int n = 100;
  double eps = 1e-3;
  double U = 1.0;
  int grid = 64;
};
Instance make_single_item_hard(const SingleItemHardParams& p);

// Small unit-demand buyers valuing (1+x, 1+(1+eps)x), x on a grid of [0,eps];
// buyers n and n+1 are large buyers for item 0 and item 1.
struct TwoItemHardParams {
  int k = 1;
  int n = 100;
  double eps = 1e-3;
  double U = 1.0;
  int grid = 64;
  // Set when n*eps is not small.
  std::optional<std::string> warning() const;
  // Small-buyer value offset of grid point t.
  double grid_x(int t) const { return eps * (t + 0.5) / grid; }
};
Instance make_two_item_hard(const TwoItemHardParams& p);

// Behaviour of a small buyer at given prices: which item it takes when both
// are available, and whether it falls back to the other.
enum class BuyerType { None, One, Two, OneTwo, TwoOne };
std::string to_string(BuyerType t);
BuyerType realized_type(const XOSValuation& v, const std::vector<double>& prices);

// Expected counts of each small-buyer type for continuous uniform x.
struct TypeRates {
  double one = 0, two = 0, one_two = 0, two_one = 0;
  // 1: no item-0-first types, 2: no item-1-first types, 3: both fallback types.
  int regime = 0;
};
TypeRates classify_types(const TwoItemHardParams& p, double p1, double p2);

// Scripted adversary on the realized small-buyer types; large buyers always
// come last. With one preferred item it applies the fixed case rule the
// lower-regime quantities assume (not always the welfare-minimizing order);
// with both fallback directions present it searches all type-group orders.
std::vector<int> two_item_adversarial_order(const Instance& inst, const TwoItemHardParams& p,
                                            const std::vector<double>& prices, const Profile& profile);

// Single-item family with k+1 balance inequalities over a price ladder.
struct SupplyTightInstance {
  Instance instance;
  int violated = 0;          // 1-based ladder position c that holds
  std::vector<double> lhs;   // left sides of the k+1 inequalities
};
std::vector<double> supply_tight_inequalities(int k, const std::vector<double>& ladder);
SupplyTightInstance make_supply_tight(int k, const std::vector<double>& ladder, double eps, double delta);

}  // namespace xosp
