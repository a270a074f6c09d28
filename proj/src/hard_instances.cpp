#include "xosp/hard_instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "xosp/mechanisms.hpp"

namespace xosp {

namespace {

void check_family(int k, int n, double eps, double U, int grid) {
  if (k < 1) throw ModelError("k must be positive");
  if (n < 0) throw ModelError("n must be nonnegative");
  if (!(eps > 0 && eps < 1)) throw ModelError("eps must lie in (0,1)");
  if (!(U >= 0) || !std::isfinite(U)) throw ModelError("U must be finite and nonnegative");
  if (grid < 1) throw ModelError("grid must be positive");
}

std::shared_ptr<const ValueDistribution> large_buyer(int m, int item, double value, double eps) {
  std::vector<double> hi(m, 0.0);
  hi[item] = value;
  std::vector<Atom> atoms;
  atoms.push_back({XOSValuation(m, {hi}), eps});
  atoms.push_back({XOSValuation(m, {std::vector<double>(m, 0.0)}), 1 - eps});
  return std::make_shared<const ValueDistribution>(std::move(atoms));
}

}  // namespace

Instance make_single_item_hard(const SingleItemHardParams& p) {
  check_family(p.k, p.n, p.eps, p.U, p.grid);
  std::vector<Atom> atoms;
  for (int t = 0; t < p.grid; ++t)
    atoms.push_back({XOSValuation(1, {{1.0 + p.eps * (t + 0.5) / p.grid}}), 1.0 / p.grid});
  auto small = std::make_shared<const ValueDistribution>(std::move(atoms));
  std::vector<std::shared_ptr<const ValueDistribution>> buyers(p.n, small);
  buyers.push_back(large_buyer(1, 0, p.U / p.eps, p.eps));
  return Instance(SupplyVector({p.k}), std::move(buyers));
}

std::optional<std::string> TwoItemHardParams::warning() const {
  if (n * eps >= 0.1) return "n*eps = " + std::to_string(n * eps) + " is not small; type rates may leave the intended regime";
  return std::nullopt;
}

Instance make_two_item_hard(const TwoItemHardParams& p) {
  check_family(p.k, p.n, p.eps, p.U, p.grid);
  std::vector<Atom> atoms;
  for (int t = 0; t < p.grid; ++t) {
    const double x = p.grid_x(t);
    atoms.push_back({XOSValuation(2, {{1.0 + x, 0.0}, {0.0, 1.0 + (1.0 + p.eps) * x}}), 1.0 / p.grid});
  }
  auto small = std::make_shared<const ValueDistribution>(std::move(atoms));
  std::vector<std::shared_ptr<const ValueDistribution>> buyers(p.n, small);
  buyers.push_back(large_buyer(2, 0, p.U / p.eps, p.eps));
  buyers.push_back(large_buyer(2, 1, p.U / p.eps, p.eps));
  return Instance(SupplyVector({p.k, p.k}), std::move(buyers));
}

std::string to_string(BuyerType t) {
  switch (t) {
    case BuyerType::None: return "none";
    case BuyerType::One: return "(1)";
    case BuyerType::Two: return "(2)";
    case BuyerType::OneTwo: return "(1,2)";
    case BuyerType::TwoOne: return "(2,1)";
  }
  return "?";
}

BuyerType realized_type(const XOSValuation& v, const std::vector<double>& prices) {
  const ItemSet both = v.demand(prices, 0b11).set;
  const bool takes0 = v.demand(prices, 0b01).set != 0;
  const bool takes1 = v.demand(prices, 0b10).set != 0;
  if (both == 0b01) return takes1 ? BuyerType::OneTwo : BuyerType::One;
  if (both == 0b10) return takes0 ? BuyerType::TwoOne : BuyerType::Two;
  if (both == 0) return BuyerType::None;
  throw std::logic_error("small buyer demanded both items");
}

TypeRates classify_types(const TwoItemHardParams& p, double p1, double p2) {
  const double eps = p.eps;
  const double top = 1.0 + (1.0 + eps) * eps;
  p1 = std::min(p1, top);
  p2 = std::min(p2, top);
  // u1 = 1 + x - p1 > 0 iff x > a; u2 > 0 iff x > b; u1 > u2 iff x < c.
  const double a = p1 - 1.0, b = (p2 - 1.0) / (1.0 + eps), c = (p2 - p1) / eps;
  auto meas = [eps](double lo, double hi) { return std::max(0.0, std::min(hi, eps) - std::max(lo, 0.0)); };
  const double scale = p.n / eps;
  TypeRates r;
  r.one = scale * meas(a, b);
  r.two = scale * meas(b, a);
  const double lo = std::max(a, b);
  r.one_two = scale * meas(lo, c);
  r.two_one = scale * meas(std::max(lo, c), eps);
  const double slack = 1e-9 * std::max(1.0, static_cast<double>(p.n));
  if (r.one + r.one_two == 0)
    r.regime = 1;
  else if (r.two + r.two_one == 0)
    r.regime = 2;
  else if (r.one <= p.n * eps + slack && r.two <= 2 * p.n * eps + slack)
    r.regime = 3;
  else
    throw std::logic_error("type rates fall outside all three regimes");
  return r;
}

std::vector<int> two_item_adversarial_order(const Instance& inst, const TwoItemHardParams& p,
                                            const std::vector<double>& prices, const Profile& profile) {
  const int n = p.n;
  std::vector<int> identity(inst.num_buyers());
  std::iota(identity.begin(), identity.end(), 0);
  std::vector<int> none, one, two, one_two, two_one;
  for (int i = 0; i < n; ++i) {
    switch (realized_type(inst.buyer(i).atom(profile[i]).valuation, prices)) {
      case BuyerType::None: none.push_back(i); break;
      case BuyerType::One: one.push_back(i); break;
      case BuyerType::Two: two.push_back(i); break;
      case BuyerType::OneTwo: one_two.push_back(i); break;
      case BuyerType::TwoOne: two_one.push_back(i); break;
    }
  }
  auto build = [&](std::initializer_list<const std::vector<int>*> groups) {
    std::vector<int> out(none);
    for (const auto* g : groups) out.insert(out.end(), g->begin(), g->end());
    out.push_back(n);
    out.push_back(n + 1);
    return out;
  };
  const int k = p.k;
  // One side only: fallback buyers first when they cannot exhaust the
  // preferred item alone, otherwise the non-fallback buyers first.
  auto one_sided = [&](const std::vector<int>& single, const std::vector<int>& fallback) {
    const int X = static_cast<int>(single.size() + fallback.size());
    if (X < k) return identity;
    if (static_cast<int>(fallback.size()) < k) return build({&fallback, &single});
    return build({&single, &fallback});
  };
  if (two.empty() && two_one.empty()) return one_sided(one, one_two);
  if (one.empty() && one_two.empty()) return one_sided(two, two_one);
  if (one.empty() && two.empty()) return identity;

  // Mixed: try every ordering of the four type groups and keep the one with
  // the lowest welfare, counting U per item left for the large buyers.
  std::vector<const std::vector<int>*> groups{&one, &two, &one_two, &two_one};
  std::vector<int> perm{0, 1, 2, 3};
  std::vector<int> best;
  double best_w = kInf;
  do {
    std::vector<int> sold(2, 0);
    double w = 0;
    for (int g : perm)
      for (int i : *groups[g]) {
        ItemSet avail = 0;
        for (int j = 0; j < 2; ++j)
          if (sold[j] < k) avail |= singleton(j);
        std::vector<double> pr = prices;
        const auto& v = inst.buyer(i).atom(profile[i]).valuation;
        const DemandResult d = v.demand(pr, avail);
        for (int j : set_members(d.set)) ++sold[j];
        w += v.value(d.set);
      }
    for (int j = 0; j < 2; ++j)
      if (sold[j] < k) w += p.U;
    if (w < best_w - 1e-12) {
      best_w = w;
      best = build({groups[perm[0]], groups[perm[1]], groups[perm[2]], groups[perm[3]]});
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<double> supply_tight_inequalities(int k, const std::vector<double>& ladder) {
  if (static_cast<int>(ladder.size()) != k) throw ModelError("ladder must have k prices");
  std::vector<double> lhs;
  double prefix = 0;
  for (int c = 1; c <= k; ++c) {
    lhs.push_back(1.0 - k * ladder[c - 1] / (2.0 * k) + prefix / (2.0 * k));
    prefix += ladder[c - 1];
  }
  lhs.push_back(prefix / (2.0 * k));
  return lhs;
}

SupplyTightInstance make_supply_tight(int k, const std::vector<double>& ladder, double eps, double delta) {
  if (k < 1) throw ModelError("k must be positive");
  if (!(eps > 0 && eps < 1) || !(delta > 0)) throw ModelError("eps must lie in (0,1) and delta be positive");
  for (double p : ladder)
    if (!(p > 0 && p < 2)) throw ModelError("ladder prices must lie in (0, 2)");
  SupplyTightInstance out;
  out.lhs = supply_tight_inequalities(k, ladder);
  const double bound = supply_bound(k);
  int c = 0;
  for (int t = 0; t <= k; ++t)
    if (out.lhs[t] <= bound + 1e-12) {
      c = t + 1;
      break;
    }
  if (c == 0) throw std::logic_error("no balance inequality holds; ladder identity violated");
  out.violated = c;

  auto single = [](double v, double prob) {
    std::vector<Atom> atoms;
    atoms.push_back({XOSValuation(1, {{v}}), prob});
    if (prob < 1) atoms.push_back({XOSValuation(1, {{0.0}}), 1 - prob});
    return ValueDistribution(std::move(atoms));
  };
  // Position k+1 stands for the per-copy welfare 2k/k = 2.
  const double pc = c <= k ? ladder[c - 1] : 2.0;
  std::vector<ValueDistribution> buyers;
  // Early buyers sit just above their copy's price so they buy it.
  for (int l = 1; l < c; ++l) buyers.push_back(single(ladder[l - 1] + delta, 1.0));
  for (int t = 0; t < k; ++t) buyers.push_back(single(pc - delta, 1.0));
  if (c <= k) buyers.push_back(single((2.0 * k - k * pc) / eps, eps));
  out.instance = Instance(SupplyVector({k}), std::move(buyers));
  return out;
}

}  // namespace xosp
