#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "xosp/core_model.hpp"
#include "xosp/ex_ante.hpp"
#include "xosp/random.hpp"

namespace xosp {

// ---- price ladders -------------------------------------------------------

// alpha_{k,c} = (1/k) (k/(k+1))^(k+1-c) for c = 1..k+1 (c = k+1 gives 1/k).
double ladder_fraction(int k, int c);
// 1 - k alpha_{c+1} + sum_{l<=c} alpha_l, for c = 0..k.
double ladder_balance(int k, int c);
// 1 - (k/(k+1))^k.
double supply_bound(int k);
// Checks the balance identity for every c in exact rational arithmetic.
bool ladder_identity_exact(int k);

class PriceSchedule {
 public:
  PriceSchedule() = default;
  // p_{j,c} = alpha_{k_j,c} * item_welfare[j].
  static PriceSchedule from_welfare(const SupplyVector& supply, const std::vector<double>& item_welfare);
  // Same price for every copy of an item.
  static PriceSchedule static_prices(const SupplyVector& supply, const std::vector<double>& prices);
  static PriceSchedule from_ladders(const SupplyVector& supply, std::vector<std::vector<double>> ladders);

  int num_items() const { return static_cast<int>(prices_.size()); }
  // copy is 1-based.
  double price(int j, int copy) const { return prices_[j][copy - 1]; }
  const std::vector<double>& ladder(int j) const { return prices_[j]; }
  // Price of the next copy given the copies sold; +inf when sold out.
  std::vector<double> current(const std::vector<int>& sold) const;

 private:
  std::vector<std::vector<double>> prices_;
};

// ---- market bookkeeping --------------------------------------------------

struct MarketState {
  std::vector<int> supply;
  std::vector<int> sold;
  double revenue = 0;
  double utility = 0;
  double welfare = 0;
  std::vector<double> item_revenue;
  std::vector<double> item_utility;
  std::vector<double> buyer_utility;
  std::vector<ItemSet> allocation;
  std::vector<ItemSet> remaining_at_arrival;

  MarketState() = default;
  MarketState(const SupplyVector& s, int num_buyers);
  ItemSet remaining() const;
  // Gives bundle S to buyer i at the given per-item prices (ignored outside S).
  void assign(int buyer, ItemSet S, const XOSValuation& v, const std::vector<double>& prices);
};

// ---- magician ------------------------------------------------------------

inline double default_gamma(int k) { return 1.0 - 1.0 / std::sqrt(k + 3.0); }

// Gamma-conservative magician over k units: tracks the exact distribution
// of consumed units and opens with probability exactly gamma per arrival.
class Magician {
 public:
  Magician() = default;
  Magician(int k, double gamma);

  struct Step {
    double open_prob = 0;  // unconditional open probability this arrival
    bool opened = false;
    bool accepted = false;
  };
  // q: probability this arrival requests a unit; arrived: whether it did.
  Step step(double q, bool arrived, Rng& rng);
  // Open probability this arrival would have, without advancing.
  double next_open_prob() const;

  int capacity() const { return k_; }
  int consumed() const { return consumed_; }
  double gamma() const { return gamma_; }
  double requested_mass() const { return mass_; }
  const std::vector<double>& distribution() const { return dist_; }
  double expected_consumed() const;

 private:
  // Threshold theta and boundary open probability r for the current state.
  void threshold(int& theta, double& r) const;

  int k_ = 0;
  double gamma_ = 0;
  int consumed_ = 0;
  double mass_ = 0;
  std::vector<double> dist_;
};

// ---- mechanisms ----------------------------------------------------------

struct RunState {
  MarketState market;
  std::vector<Magician> magicians;
  double worst_certificate = 0;  // largest LP certificate residual seen
  int demand_violations = 0;     // allocated bundles outside the buyer's demand
};

class Mechanism {
 public:
  virtual ~Mechanism() = default;
  virtual std::string name() const = 0;
  virtual RunState start(const Instance& inst) const;
  virtual void serve(RunState& st, const Instance& inst, int buyer, int atom, Rng& rng) const = 0;
  // Prices offered to the next buyer, where meaningful.
  virtual std::vector<double> offered_prices(const RunState& st) const;
};

class SupplyBasedPricing : public Mechanism {
 public:
  explicit SupplyBasedPricing(PriceSchedule schedule) : schedule_(std::move(schedule)) {}
  std::string name() const override { return "supply"; }
  void serve(RunState& st, const Instance& inst, int buyer, int atom, Rng& rng) const override;
  std::vector<double> offered_prices(const RunState& st) const override;
  const PriceSchedule& schedule() const { return schedule_; }

 private:
  PriceSchedule schedule_;
};

// One buyer's allocation program over the items still in stock.
struct BuyerProgram {
  ItemSet remaining = 0;
  std::vector<double> prices;       // rho_j on remaining items, +inf elsewhere
  std::vector<double> atom_duals;   // psi_v
  std::vector<std::vector<SetMass>> y;  // y[v] = nonzero (S, y_{v,S})
  double objective = 0;
  LpCertificate certificate;
};

double dynamic_scale(int k, double C);

class DynamicPricing : public Mechanism {
 public:
  DynamicPricing(const Instance& inst, const ExAnteSolution& sol, double C = 2.0);
  std::string name() const override { return "dynamic"; }
  void serve(RunState& st, const Instance& inst, int buyer, int atom, Rng& rng) const override;
  std::vector<double> offered_prices(const RunState& st) const override;

  double scale() const { return scale_; }
  const std::vector<std::vector<double>>& z() const { return z_; }
  // Solved lazily and cached per (buyer, remaining set).
  const BuyerProgram& program(int buyer, ItemSet remaining) const;

 private:
  const Instance* inst_;
  double scale_;
  std::vector<std::vector<double>> z_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, ItemSet>, std::unique_ptr<BuyerProgram>> cache_;
};

class MagicianReduction : public Mechanism {
 public:
  // gamma <= 0 selects 1 - 1/sqrt(k_j + 3) per item.
  MagicianReduction(const Instance& inst, const ExAnteSolution& sol, double gamma = 0);
  std::string name() const override { return "magician"; }
  RunState start(const Instance& inst) const override;
  void serve(RunState& st, const Instance& inst, int buyer, int atom, Rng& rng) const override;
  double gamma(int j) const { return gammas_[j]; }

 private:
  ExAnteSolution sol_;
  std::vector<double> gammas_;
};

// Convenience single-run drivers.
MarketState run_supply_based(const Instance& inst, const PriceSchedule& schedule, const std::vector<int>& order,
                             const Profile& profile);
RunState run_mechanism(const Mechanism& mech, const Instance& inst, const std::vector<int>& order,
                       const Profile& profile, Rng& rng);

// ---- multi-unit reduction ------------------------------------------------

// clauses[a][j] = nonincreasing marginal weights for units of item j.
struct MultiUnitValuation {
  std::vector<std::vector<std::vector<double>>> clauses;
  double value(const std::vector<int>& counts) const;
};

struct MultiUnitAtom {
  MultiUnitValuation valuation;
  double prob = 0;
};

struct MultiUnitInstance {
  std::vector<int> supply;
  int demand_cap = 1;
  std::vector<std::vector<MultiUnitAtom>> buyers;
  void validate() const;
};

struct ReducedInstance {
  Instance instance;
  std::vector<int> type_item;               // original item of each bin
  std::vector<std::vector<int>> item_bins;  // bins of each original item
  // Units of each original item held by a bundle of bins.
  std::vector<int> counts(ItemSet s) const;
};

ReducedInstance multi_unit_reduce(const MultiUnitInstance& mi);

}  // namespace xosp
