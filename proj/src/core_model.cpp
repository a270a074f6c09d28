#include "xosp/core_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace xosp {

int set_size(ItemSet s) { return std::popcount(s); }

std::vector<int> set_members(ItemSet s) {
  std::vector<int> out;
  while (s) {
    out.push_back(std::countr_zero(s));
    s &= s - 1;
  }
  return out;
}

std::string format_set(ItemSet s) {
  std::string out = "{";
  bool first = true;
  for (int j : set_members(s)) {
    if (!first) out += ",";
    out += std::to_string(j);
    first = false;
  }
  return out + "}";
}

SupplyVector::SupplyVector(std::vector<int> counts) : counts_(std::move(counts)) {
  if (static_cast<int>(counts_.size()) > kMaxItems) throw ModelError("too many items");
  for (int c : counts_)
    if (c < 0) throw ModelError("supply must be nonnegative");
}

int SupplyVector::min_supply() const {
  if (counts_.empty()) return 0;
  return *std::min_element(counts_.begin(), counts_.end());
}

long SupplyVector::total() const { return std::accumulate(counts_.begin(), counts_.end(), 0L); }

XOSValuation::XOSValuation(int num_items, std::vector<std::vector<double>> clauses)
    : m_(num_items), num_clauses_(static_cast<int>(clauses.size())) {
  if (m_ < 0 || m_ > kMaxItems) throw ModelError("bad item count");
  if (clauses.empty()) throw ModelError("valuation needs at least one clause");
  coeffs_.reserve(clauses.size() * m_);
  for (const auto& c : clauses) {
    if (static_cast<int>(c.size()) != m_) throw ModelError("clause length does not match item count");
    for (double a : c) {
      if (!std::isfinite(a) || a < 0) throw ModelError("clause coefficients must be finite and nonnegative");
      coeffs_.push_back(a);
    }
  }
}

std::vector<double> XOSValuation::clause_vector(int a) const {
  const double* c = clause(a);
  return {c, c + m_};
}

double XOSValuation::value(ItemSet s) const {
  double best = 0;
  for (int a = 0; a < num_clauses_; ++a) {
    const double* c = clause(a);
    double v = 0;
    for (int j = 0; j < m_; ++j)
      if (contains(s, j)) v += c[j];
    best = std::max(best, v);
  }
  return best;
}

int XOSValuation::supporting_clause(ItemSet s) const {
  int best = 0;
  double best_v = -1.0;
  for (int a = 0; a < num_clauses_; ++a) {
    const double* c = clause(a);
    double v = 0;
    for (int j = 0; j < m_; ++j)
      if (contains(s, j)) v += c[j];
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

DemandResult XOSValuation::demand(const std::vector<double>& prices, ItemSet available) const {
  // max_S v(S) - p(S) = max_a sum_j max(a_j - p_j, 0) over available j.
  DemandResult r;
  double best = -1.0;
  for (int a = 0; a < num_clauses_; ++a) {
    const double* c = clause(a);
    double u = 0;
    for (int j = 0; j < m_; ++j)
      if (contains(available, j) && c[j] - prices[j] > 0) u += c[j] - prices[j];
    if (u > best) {
      best = u;
      r.clause = a;
    }
  }
  if (r.clause < 0) return r;
  const double* c = clause(r.clause);
  for (int j = 0; j < m_; ++j)
    if (contains(available, j) && c[j] - prices[j] > 0) r.set |= singleton(j);
  r.utility = best;
  return r;
}

bool XOSValuation::is_unit_demand() const {
  for (int a = 0; a < num_clauses_; ++a) {
    int pos = 0;
    for (int j = 0; j < m_; ++j) pos += clause(a)[j] > 0;
    if (pos > 1) return false;
  }
  return true;
}

double XOSValuation::item_value(int j) const {
  double v = 0;
  for (int a = 0; a < num_clauses_; ++a) v = std::max(v, clause(a)[j]);
  return v;
}

ValueDistribution::ValueDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ModelError("distribution needs at least one atom");
  double total = 0;
  const int m = atoms_.front().valuation.num_items();
  for (const auto& at : atoms_) {
    if (!(at.prob > 0) || !std::isfinite(at.prob)) throw ModelError("atom probabilities must be positive");
    if (at.valuation.num_items() != m) throw ModelError("atoms disagree on item count");
    total += at.prob;
  }
  if (std::abs(total - 1.0) > kSumTolerance)
    throw ModelError("atom probabilities sum to " + std::to_string(total) + ", not 1");
  cumulative_.reserve(atoms_.size());
  double run = 0;
  for (auto& at : atoms_) {
    at.prob /= total;
    run += at.prob;
    cumulative_.push_back(run);
  }
  cumulative_.back() = 1.0;
}

int ValueDistribution::locate(double u) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<int>(it - cumulative_.begin());
}

Instance::Instance(SupplyVector supply, std::vector<std::shared_ptr<const ValueDistribution>> buyers,
                   std::optional<int> demand_cap)
    : supply_(std::move(supply)), buyers_(std::move(buyers)), demand_cap_(demand_cap) {
  for (const auto& b : buyers_) {
    if (!b) throw ModelError("null buyer distribution");
    if (b->num_items() != supply_.num_items()) throw ModelError("buyer item count does not match supply");
  }
  if (demand_cap_ && *demand_cap_ < 1) throw ModelError("demand cap must be positive");
}

Instance::Instance(SupplyVector supply, std::vector<ValueDistribution> buyers, std::optional<int> demand_cap)
    : Instance(std::move(supply),
               [&] {
                 std::vector<std::shared_ptr<const ValueDistribution>> out;
                 out.reserve(buyers.size());
                 for (auto& b : buyers) out.push_back(std::make_shared<const ValueDistribution>(std::move(b)));
                 return out;
               }(),
               demand_cap) {}

}  // namespace xosp
