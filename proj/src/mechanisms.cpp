#include "xosp/mechanisms.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>

namespace xosp {

// ---- price ladders -------------------------------------------------------

double ladder_fraction(int k, int c) {
  if (k < 1 || c < 1 || c > k + 1) throw std::out_of_range("ladder index out of range");
  return std::pow(static_cast<double>(k) / (k + 1), k + 1 - c) / k;
}

double ladder_balance(int k, int c) {
  double s = 1.0 - k * ladder_fraction(k, c + 1);
  for (int l = 1; l <= c; ++l) s += ladder_fraction(k, l);
  return s;
}

double supply_bound(int k) { return 1.0 - std::pow(static_cast<double>(k) / (k + 1), k); }

bool ladder_identity_exact(int k) {
  using boost::multiprecision::cpp_rational;
  const cpp_rational r(k, k + 1);
  std::vector<cpp_rational> pw(k + 2, cpp_rational(1));
  for (int e = 1; e <= k + 1; ++e) pw[e] = pw[e - 1] * r;
  auto alpha = [&](int c) { return pw[k + 1 - c] / k; };
  const cpp_rational target = 1 - pw[k];
  cpp_rational prefix = 0;
  for (int c = 0; c <= k; ++c) {
    if (c > 0) prefix += alpha(c);
    if (1 - k * alpha(c + 1) + prefix != target) return false;
  }
  return true;
}

PriceSchedule PriceSchedule::from_welfare(const SupplyVector& supply, const std::vector<double>& item_welfare) {
  if (static_cast<int>(item_welfare.size()) != supply.num_items()) throw std::invalid_argument("welfare length");
  PriceSchedule s;
  s.prices_.resize(supply.num_items());
  for (int j = 0; j < supply.num_items(); ++j)
    for (int c = 1; c <= supply[j]; ++c) s.prices_[j].push_back(ladder_fraction(supply[j], c) * item_welfare[j]);
  return s;
}

PriceSchedule PriceSchedule::static_prices(const SupplyVector& supply, const std::vector<double>& prices) {
  if (static_cast<int>(prices.size()) != supply.num_items()) throw std::invalid_argument("price length");
  PriceSchedule s;
  s.prices_.resize(supply.num_items());
  for (int j = 0; j < supply.num_items(); ++j) s.prices_[j].assign(supply[j], prices[j]);
  return s;
}

PriceSchedule PriceSchedule::from_ladders(const SupplyVector& supply, std::vector<std::vector<double>> ladders) {
  if (static_cast<int>(ladders.size()) != supply.num_items()) throw std::invalid_argument("ladder count");
  for (int j = 0; j < supply.num_items(); ++j)
    if (static_cast<int>(ladders[j].size()) != supply[j]) throw std::invalid_argument("ladder length");
  PriceSchedule s;
  s.prices_ = std::move(ladders);
  return s;
}

std::vector<double> PriceSchedule::current(const std::vector<int>& sold) const {
  std::vector<double> p(prices_.size(), kInf);
  for (size_t j = 0; j < prices_.size(); ++j)
    if (sold[j] < static_cast<int>(prices_[j].size())) p[j] = prices_[j][sold[j]];
  return p;
}

// ---- market bookkeeping --------------------------------------------------

MarketState::MarketState(const SupplyVector& s, int num_buyers)
    : supply(s.counts()),
      sold(s.num_items(), 0),
      item_revenue(s.num_items(), 0.0),
      item_utility(s.num_items(), 0.0),
      buyer_utility(num_buyers, 0.0),
      allocation(num_buyers, 0),
      remaining_at_arrival(num_buyers, 0) {}

ItemSet MarketState::remaining() const {
  ItemSet r = 0;
  for (size_t j = 0; j < supply.size(); ++j)
    if (sold[j] < supply[j]) r |= singleton(static_cast<int>(j));
  return r;
}

void MarketState::assign(int buyer, ItemSet S, const XOSValuation& v, const std::vector<double>& prices) {
  if (S & ~remaining()) throw std::logic_error("allocating an item that is sold out");
  allocation[buyer] = S;
  if (!S) return;
  const double value = v.value(S);
  const double* cl = v.clause(v.supporting_clause(S));
  double paid = 0;
  for (int j : set_members(S)) {
    ++sold[j];
    paid += prices[j];
    item_revenue[j] += prices[j];
    item_utility[j] += cl[j] - prices[j];
  }
  revenue += paid;
  utility += value - paid;
  buyer_utility[buyer] = value - paid;
  welfare += value;
}

// ---- magician ------------------------------------------------------------

Magician::Magician(int k, double gamma) : k_(k), gamma_(gamma), dist_(k + 1, 0.0) {
  if (k < 1) throw std::invalid_argument("magician needs at least one unit");
  if (!(gamma >= 0 && gamma <= 1)) throw std::invalid_argument("gamma must lie in [0,1]");
  dist_[0] = 1.0;
}

void Magician::threshold(int& theta, double& r) const {
  double below = 0;
  for (theta = 0; theta < k_; ++theta) {
    if (below + dist_[theta] >= gamma_) {
      r = dist_[theta] > 0 ? std::clamp((gamma_ - below) / dist_[theta], 0.0, 1.0) : 0.0;
      return;
    }
    below += dist_[theta];
  }
  // Pr[consumed < k] < gamma: open whenever a unit is left.
  theta = k_;
  r = 0;
}

double Magician::next_open_prob() const {
  int theta;
  double r;
  threshold(theta, r);
  double p = 0;
  for (int w = 0; w < theta; ++w) p += dist_[w];
  if (theta < k_) p += r * dist_[theta];
  return p;
}

Magician::Step Magician::step(double q, bool arrived, Rng& rng) {
  if (q < 0 || q > 1 + 1e-12) throw std::invalid_argument("request probability out of range");
  if (mass_ + q > k_ + 1e-9) throw std::logic_error("requested ex-ante mass exceeds magician capacity");
  mass_ += q;
  int theta;
  double r;
  threshold(theta, r);
  auto open_at = [&](int w) { return w < theta ? 1.0 : (w == theta && w < k_ ? r : 0.0); };

  Step s;
  for (int w = 0; w <= k_; ++w) s.open_prob += dist_[w] * open_at(w);
  const double ow = open_at(consumed_);
  s.opened = ow >= 1.0 || (ow > 0 && uniform01(rng) < ow);
  s.accepted = arrived && s.opened && consumed_ < k_;
  if (s.accepted) ++consumed_;

  std::vector<double> next(k_ + 1, 0.0);
  for (int w = 0; w <= k_; ++w) {
    const double move = dist_[w] * open_at(w) * q;
    next[w] += dist_[w] - move;
    if (w < k_) next[w + 1] += move;
  }
  dist_ = std::move(next);
  return s;
}

double Magician::expected_consumed() const {
  double e = 0;
  for (int w = 0; w <= k_; ++w) e += w * dist_[w];
  return e;
}

// ---- mechanisms ----------------------------------------------------------

RunState Mechanism::start(const Instance& inst) const {
  RunState st;
  st.market = MarketState(inst.supply(), inst.num_buyers());
  return st;
}

std::vector<double> Mechanism::offered_prices(const RunState& st) const {
  return std::vector<double>(st.market.supply.size(), 0.0);
}

std::vector<double> SupplyBasedPricing::offered_prices(const RunState& st) const {
  return schedule_.current(st.market.sold);
}

void SupplyBasedPricing::serve(RunState& st, const Instance& inst, int buyer, int atom, Rng&) const {
  const ItemSet avail = st.market.remaining();
  st.market.remaining_at_arrival[buyer] = avail;
  const auto prices = schedule_.current(st.market.sold);
  const auto& v = inst.buyer(buyer).atom(atom).valuation;
  const DemandResult d = v.demand(prices, avail);
  st.market.assign(buyer, d.set, v, prices);
}

double dynamic_scale(int k, double C) {
  if (k <= 1) return 1.0;
  return std::clamp(1.0 - C * std::sqrt(std::log(static_cast<double>(k)) / k), 0.0, 1.0);
}

DynamicPricing::DynamicPricing(const Instance& inst, const ExAnteSolution& sol, double C)
    : inst_(&inst), scale_(dynamic_scale(inst.supply().min_supply(), C)) {
  z_ = sol.z;
  for (auto& row : z_)
    for (double& v : row) v *= scale_;
}

const BuyerProgram& DynamicPricing::program(int buyer, ItemSet remaining) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find({buyer, remaining});
    if (it != cache_.end()) return *it->second;
  }
  const auto& dist = inst_->buyer(buyer);
  const int m = inst_->num_items();
  auto prog = std::make_unique<BuyerProgram>();
  prog->remaining = remaining;
  prog->prices.assign(m, kInf);
  prog->atom_duals.assign(dist.num_atoms(), 0.0);
  prog->y.resize(dist.num_atoms());

  struct Column {
    int atom;
    ItemSet set;
  };
  std::vector<Column> cols;
  LinearProgram lp;
  for (int a = 0; a < dist.num_atoms(); ++a)
    for (ItemSet s = remaining; s; s = (s - 1) & remaining) {
      const double v = dist.atom(a).valuation.value(s);
      if (v <= 0) continue;
      cols.push_back({a, s});
      lp.c.push_back(v);
    }
  lp.num_vars = static_cast<int>(cols.size());
  const auto items = set_members(remaining);
  for (int j : items) {
    std::vector<double> row(lp.num_vars, 0.0);
    for (int c = 0; c < lp.num_vars; ++c)
      if (contains(cols[c].set, j)) row[c] = 1.0;
    lp.add_row(std::move(row), z_[buyer][j]);
  }
  for (int a = 0; a < dist.num_atoms(); ++a) {
    std::vector<double> row(lp.num_vars, 0.0);
    for (int c = 0; c < lp.num_vars; ++c)
      if (cols[c].atom == a) row[c] = 1.0;
    lp.add_row(std::move(row), dist.atom(a).prob);
  }
  if (lp.num_vars > 0) {
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) throw std::runtime_error("buyer program did not solve");
    prog->objective = sol.objective;
    prog->certificate = sol.certificate;
    for (size_t t = 0; t < items.size(); ++t) prog->prices[items[t]] = sol.row_duals[t];
    for (int a = 0; a < dist.num_atoms(); ++a) prog->atom_duals[a] = sol.row_duals[items.size() + a];
    for (int c = 0; c < lp.num_vars; ++c)
      if (sol.primal[c] > 1e-12) prog->y[cols[c].atom].push_back({cols[c].set, sol.primal[c]});
  } else {
    for (int j : items) prog->prices[j] = 0.0;
  }

  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = cache_.emplace(std::make_pair(buyer, remaining), std::move(prog));
  return *it->second;
}

std::vector<double> DynamicPricing::offered_prices(const RunState&) const {
  throw std::logic_error("dynamic prices depend on the arriving buyer");
}

void DynamicPricing::serve(RunState& st, const Instance& inst, int buyer, int atom, Rng& rng) const {
  const ItemSet R = st.market.remaining();
  st.market.remaining_at_arrival[buyer] = R;
  const BuyerProgram& prog = program(buyer, R);
  st.worst_certificate = std::max(st.worst_certificate, prog.certificate.worst());
  const auto& at = inst.buyer(buyer).atom(atom);

  // S with probability y*_{v,S} / Pr[v]; leftover probability gives nothing.
  ItemSet chosen = 0;
  double u = uniform01(rng) * at.prob;
  for (const SetMass& sm : prog.y[atom]) {
    if (u < sm.mass) {
      chosen = sm.set;
      break;
    }
    u -= sm.mass;
  }
  // Every allocated bundle must be in the buyer's demand at prices rho.
  const double best = at.valuation.demand(prog.prices, R).utility;
  double price = 0;
  for (int j : set_members(chosen)) price += prog.prices[j];
  const double got = chosen ? at.valuation.value(chosen) - price : 0.0;
  if (got < best - 1e-7 * std::max(1.0, best)) ++st.demand_violations;
  st.market.assign(buyer, chosen, at.valuation, prog.prices);
}

MagicianReduction::MagicianReduction(const Instance& inst, const ExAnteSolution& sol, double gamma) : sol_(sol) {
  for (int j = 0; j < inst.num_items(); ++j)
    gammas_.push_back(gamma > 0 ? gamma : default_gamma(std::max(1, inst.supply()[j])));
}

RunState MagicianReduction::start(const Instance& inst) const {
  RunState st = Mechanism::start(inst);
  for (int j = 0; j < inst.num_items(); ++j) st.magicians.emplace_back(std::max(1, inst.supply()[j]), gammas_[j]);
  return st;
}

void MagicianReduction::serve(RunState& st, const Instance& inst, int buyer, int atom, Rng& rng) const {
  st.market.remaining_at_arrival[buyer] = st.market.remaining();
  const auto& v = inst.buyer(buyer).atom(atom).valuation;
  ItemSet S = 0;
  double u = uniform01(rng);
  for (const SetMass& sm : sol_.x[buyer][atom]) {
    if (u < sm.mass) {
      S = sm.set;
      break;
    }
    u -= sm.mass;
  }
  const double* cl = v.clause(v.supporting_clause(S));
  ItemSet granted = 0;
  double additive = 0;
  for (int j = 0; j < inst.num_items(); ++j) {
    if (inst.supply()[j] == 0) continue;
    const Magician::Step s = st.magicians[j].step(sol_.z[buyer][j], contains(S, j), rng);
    if (s.accepted) {
      granted |= singleton(j);
      additive += cl[j];
    }
  }
  if (v.value(granted) < additive - 1e-9) throw std::logic_error("granted bundle value below its clause sum");
  std::vector<double> zero(inst.num_items(), 0.0);
  st.market.assign(buyer, granted, v, zero);
}

MarketState run_supply_based(const Instance& inst, const PriceSchedule& schedule, const std::vector<int>& order,
                             const Profile& profile) {
  SupplyBasedPricing mech(schedule);
  Rng rng(0);
  return run_mechanism(mech, inst, order, profile, rng).market;
}

RunState run_mechanism(const Mechanism& mech, const Instance& inst, const std::vector<int>& order,
                       const Profile& profile, Rng& rng) {
  RunState st = mech.start(inst);
  for (int i : order) mech.serve(st, inst, i, profile[i], rng);
  return st;
}

// ---- multi-unit reduction ------------------------------------------------

double MultiUnitValuation::value(const std::vector<int>& counts) const {
  double best = 0;
  for (const auto& cl : clauses) {
    double v = 0;
    for (size_t j = 0; j < cl.size(); ++j)
      for (int t = 0; t < std::min<int>(counts[j], static_cast<int>(cl[j].size())); ++t) v += cl[j][t];
    best = std::max(best, v);
  }
  return best;
}

void MultiUnitInstance::validate() const {
  if (demand_cap < 1) throw ModelError("demand cap must be at least 1");
  const size_t m = supply.size();
  for (int k : supply)
    if (k < 0) throw ModelError("supply must be nonnegative");
  for (size_t i = 0; i < buyers.size(); ++i) {
    double total = 0;
    if (buyers[i].empty()) throw ModelError("buyer " + std::to_string(i) + " has no atoms");
    for (const auto& at : buyers[i]) {
      if (!(at.prob > 0)) throw ModelError("atom probabilities must be positive");
      total += at.prob;
      if (at.valuation.clauses.empty()) throw ModelError("valuation needs a clause");
      for (const auto& cl : at.valuation.clauses) {
        if (cl.size() != m) throw ModelError("clause item count mismatch");
        for (size_t j = 0; j < m; ++j) {
          const int cap = supply[j] / demand_cap;
          if (static_cast<int>(cl[j].size()) > cap)
            throw ModelError("clause demands more than floor(k_j / demand_cap) units of item " + std::to_string(j));
          for (size_t t = 0; t < cl[j].size(); ++t) {
            if (!(cl[j][t] >= 0) || !std::isfinite(cl[j][t])) throw ModelError("weights must be nonnegative");
            if (t > 0 && cl[j][t] > cl[j][t - 1]) throw ModelError("marginal weights must be nonincreasing");
          }
        }
      }
    }
    if (std::abs(total - 1.0) > ValueDistribution::kSumTolerance) throw ModelError("atom probabilities must sum to 1");
  }
}

std::vector<int> ReducedInstance::counts(ItemSet s) const {
  std::vector<int> c(item_bins.size(), 0);
  for (int b : set_members(s)) ++c[type_item[b]];
  return c;
}

ReducedInstance multi_unit_reduce(const MultiUnitInstance& mi) {
  mi.validate();
  const int m = static_cast<int>(mi.supply.size());
  const int ell = mi.demand_cap;
  ReducedInstance red;
  red.item_bins.resize(m);
  std::vector<int> bin_supply;
  for (int j = 0; j < m; ++j) {
    const int bins = mi.supply[j] / ell;
    // Split k_j into `bins` near-equal parts, larger parts first.
    for (int b = 0; b < bins; ++b) {
      const int size = mi.supply[j] / bins + (b < mi.supply[j] % bins ? 1 : 0);
      red.item_bins[j].push_back(static_cast<int>(red.type_item.size()));
      red.type_item.push_back(j);
      bin_supply.push_back(size);
    }
  }
  const int M = static_cast<int>(red.type_item.size());
  if (M > kMaxItems) throw CapError("reduction produces too many item types");

  constexpr size_t kMaxClauses = 1 << 14;
  std::vector<ValueDistribution> dists;
  for (const auto& buyer : mi.buyers) {
    std::vector<Atom> atoms;
    for (const auto& at : buyer) {
      std::vector<std::vector<double>> out;
      for (const auto& cl : at.valuation.clauses) {
        // Every way of placing the t-th marginal weight of item j on a
        // distinct bin of j; the max over placements is the concave value.
        std::vector<std::vector<double>> partial{std::vector<double>(M, 0.0)};
        for (int j = 0; j < m; ++j) {
          std::vector<double> w = cl[j];
          while (!w.empty() && w.back() == 0) w.pop_back();
          if (w.empty()) continue;
          const auto& bins = red.item_bins[j];
          std::vector<std::vector<double>> grown;
          std::vector<int> pick;
          std::vector<char> used(bins.size(), 0);
          auto rec = [&](auto&& self, std::vector<double>& vec) -> void {
            if (pick.size() == w.size()) {
              grown.push_back(vec);
              if (grown.size() * partial.size() > kMaxClauses) throw CapError("too many translated clauses");
              return;
            }
            for (size_t b = 0; b < bins.size(); ++b) {
              if (used[b]) continue;
              used[b] = 1;
              pick.push_back(static_cast<int>(b));
              vec[bins[b]] = w[pick.size() - 1];
              self(self, vec);
              vec[bins[b]] = 0;
              pick.pop_back();
              used[b] = 0;
            }
          };
          for (auto& base : partial) rec(rec, base);
          partial = std::move(grown);
        }
        for (auto& p : partial) out.push_back(std::move(p));
        if (out.size() > kMaxClauses) throw CapError("too many translated clauses");
      }
      atoms.push_back({XOSValuation(M, std::move(out)), at.prob});
    }
    dists.emplace_back(std::move(atoms));
  }
  red.instance = Instance(SupplyVector(bin_supply), std::move(dists), ell);
  return red;
}

}  // namespace xosp
