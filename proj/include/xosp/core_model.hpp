#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xosp {

// Item sets are bitmasks over item indices 0..m-1.
using ItemSet = std::uint64_t;

constexpr int kMaxItems = 64;

inline bool contains(ItemSet s, int j) { return (s >> j) & 1u; }
inline ItemSet singleton(int j) { return ItemSet{1} << j; }
inline ItemSet full_set(int m) { return m >= 64 ? ~ItemSet{0} : (ItemSet{1} << m) - 1; }
int set_size(ItemSet s);
std::vector<int> set_members(ItemSet s);
std::string format_set(ItemSet s);

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Nonnegative integer copies per item.
class SupplyVector {
 public:
  SupplyVector() = default;
  explicit SupplyVector(std::vector<int> counts);

  int num_items() const { return static_cast<int>(counts_.size()); }
  int operator[](int j) const { return counts_[j]; }
  const std::vector<int>& counts() const { return counts_; }
  // Smallest per-item supply; 0 for an empty market.
  int min_supply() const;
  long total() const;

 private:
  std::vector<int> counts_;
};

struct DemandResult {
  ItemSet set = 0;
  double utility = 0.0;
  int clause = -1;
};

// Maximum of additive clauses: v(S) = max_a sum_{j in S} a_j.
class XOSValuation {
 public:
  XOSValuation() = default;
  XOSValuation(int num_items, std::vector<std::vector<double>> clauses);

  int num_items() const { return m_; }
  int num_clauses() const { return num_clauses_; }
  const double* clause(int a) const { return coeffs_.data() + static_cast<size_t>(a) * m_; }
  std::vector<double> clause_vector(int a) const;

  double value(ItemSet s) const;
  // Lowest-index clause attaining v(S).
  int supporting_clause(ItemSet s) const;
  // Utility-maximizing bundle among `available` items at the given prices.
  // Zero-utility items are left out; clause ties resolve to the lower index.
  DemandResult demand(const std::vector<double>& prices, ItemSet available) const;

  // True when every clause has at most one positive coefficient.
  bool is_unit_demand() const;
  // max_a a_j, the value of item j alone.
  double item_value(int j) const;

 private:
  int m_ = 0;
  int num_clauses_ = 0;
  std::vector<double> coeffs_;
};

struct Atom {
  XOSValuation valuation;
  double prob = 0.0;
};

// Finite-support distribution over XOS valuations.
class ValueDistribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  ValueDistribution() = default;
  // Probabilities must be positive and sum to 1 within kSumTolerance;
  // they are renormalized afterwards.
  explicit ValueDistribution(std::vector<Atom> atoms);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  const Atom& atom(int a) const { return atoms_[a]; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  int num_items() const { return atoms_.empty() ? 0 : atoms_.front().valuation.num_items(); }
  // Atom index for a uniform draw u in [0,1).
  int locate(double u) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
};

// Market instance; immutable after construction. Buyer distributions are
// shared so that families with many identical buyers stay compact.
class Instance {
 public:
  Instance() = default;
  Instance(SupplyVector supply, std::vector<std::shared_ptr<const ValueDistribution>> buyers,
           std::optional<int> demand_cap = std::nullopt);
  Instance(SupplyVector supply, std::vector<ValueDistribution> buyers,
           std::optional<int> demand_cap = std::nullopt);

  int num_buyers() const { return static_cast<int>(buyers_.size()); }
  int num_items() const { return supply_.num_items(); }
  const SupplyVector& supply() const { return supply_; }
  const ValueDistribution& buyer(int i) const { return *buyers_[i]; }
  const std::shared_ptr<const ValueDistribution>& buyer_ptr(int i) const { return buyers_[i]; }
  // Set on instances produced by the multi-unit reduction.
  std::optional<int> demand_cap() const { return demand_cap_; }

 private:
  SupplyVector supply_;
  std::vector<std::shared_ptr<const ValueDistribution>> buyers_;
  std::optional<int> demand_cap_;
};

// Realized atom index per buyer.
using Profile = std::vector<int>;

}  // namespace xosp
