#include "xosp/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "xosp/lp_core.hpp"
#include "xosp/mechanisms.hpp"
#include "xosp/random.hpp"
#include "xosp/ratio_calc.hpp"

namespace xosp {

const double kTauTable[10] = {.5859, .6309, .6605, .6821, .6989, .7125, .7239, .7337, .7422, .7497};
const double kTauHatTable[10] = {.5843, .6286, .6578, .6793, .6960, .7096, .7210, .7307, .7392, .7468};

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

CheckResult ladder_check() {
  double worst = 0;
  bool exact = true;
  for (int k = 1; k <= 50; ++k) {
    for (int c = 0; c <= k; ++c) worst = std::max(worst, std::abs(ladder_balance(k, c) - supply_bound(k)));
    exact = exact && ladder_identity_exact(k);
  }
  return {"ladder balance identity k<=50", worst <= 1e-12 && exact,
          "max residual " + fmt("%.3g", worst) + (exact ? ", exact rational check ok" : ", exact check FAILED")};
}

CheckResult lp_check(Rng& rng) {
  double worst = 0;
  int solved = 0;
  for (int t = 0; t < 50; ++t) {
    LinearProgram lp;
    lp.num_vars = 2 + static_cast<int>(rng() % 7);
    const int rows = 1 + static_cast<int>(rng() % 8);
    for (int j = 0; j < lp.num_vars; ++j) lp.c.push_back(uniform01(rng) * 4 - 1);
    for (int i = 0; i < rows; ++i) {
      std::vector<double> row;
      for (int j = 0; j < lp.num_vars; ++j) row.push_back(uniform01(rng) * 3 - 0.5);
      lp.add_row(std::move(row), uniform01(rng) * 5);
    }
    for (int j = 0; j < lp.num_vars; ++j) lp.upper.push_back(1 + uniform01(rng) * 3);
    const LpSolution s = solve_lp(lp);
    if (s.status != LpStatus::Optimal) continue;
    ++solved;
    worst = std::max(worst, s.certificate.worst());
  }
  return {"LP strong duality and slackness", solved == 50 && worst <= 1e-8,
          std::to_string(solved) + "/50 solved, worst residual " + fmt("%.3g", worst)};
}

CheckResult window_check(Rng& rng) {
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(rng() % 15);
    const int a = static_cast<int>(rng() % (n + 1));
    const int b = a + static_cast<int>(rng() % (n - a + 1));
    std::vector<double> f(n + 1);
    for (double& v : f) v = uniform01(rng) * 2 - 1;
    const double p = 0.02 + 0.96 * uniform01(rng);
    worst = std::max(worst, window_derivative_check(f, a, b, n, p).error());
  }
  return {"binomial window derivative identity", worst <= 1e-6, "max error " + fmt("%.3g", worst)};
}

CheckResult derivative_check() {
  double worst = 0;
  const double h = 1e-5;
  for (int k = 2; k <= 8; ++k)
    for (double l : {0.3, 1.0, 2.5, 6.0, 12.0}) {
      const double fm = (mu_hat_k(l + h, k) - mu_hat_k(l - h, k)) / (2 * h);
      const double fd = (delta_hat_k(l + h, k) - delta_hat_k(l - h, k)) / (2 * h);
      worst = std::max({worst, std::abs(fm - d_mu_hat(l, k)), std::abs(fd - d_delta_hat(l, k))});
    }
  return {"rate derivatives vs finite differences", worst <= 1e-6, "max error " + fmt("%.3g", worst)};
}

CheckResult table_check() {
  double worst = 0;
  bool ordered = true;
  for (int k = 2; k <= 11; ++k) {
    const RatioReport r = compute_ratios(k);
    worst = std::max({worst, std::abs(r.tau - kTauTable[k - 2]), std::abs(r.tau_hat - kTauHatTable[k - 2])});
    ordered = ordered && r.tau_hat < r.tau;
  }
  return {"ratio table k=2..11", worst <= 1e-4 && ordered,
          "max deviation " + fmt("%.3g", worst) + (ordered ? "" : ", ordering violated")};
}

CheckResult magician_check(Rng& rng) {
  double worst = 0;
  for (int k : {1, 2, 5, 10}) {
    Magician mg(k, default_gamma(k));
    const int arrivals = 4 * k;
    for (int t = 0; t < arrivals; ++t) {
      const auto s = mg.step(0.25, uniform01(rng) < 0.25, rng);
      worst = std::max(worst, std::abs(s.open_prob - mg.gamma()));
    }
  }
  return {"magician open probability equals gamma", worst <= 1e-9, "max deviation " + fmt("%.3g", worst)};
}

CheckResult demand_check(Rng& rng) {
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const int m = 1 + static_cast<int>(rng() % 5);
    const int nc = 1 + static_cast<int>(rng() % 4);
    std::vector<std::vector<double>> cls(nc, std::vector<double>(m));
    for (auto& c : cls)
      for (double& v : c) v = uniform01(rng) * 3;
    const XOSValuation v(m, cls);
    std::vector<double> p(m);
    for (double& x : p) x = uniform01(rng) * 2;
    const ItemSet avail = rng() & full_set(m);
    double best = 0;
    for (ItemSet s = avail;; s = (s - 1) & avail) {
      double price = 0;
      for (int j : set_members(s)) price += p[j];
      best = std::max(best, v.value(s) - price);
      if (s == 0) break;
    }
    const DemandResult d = v.demand(p, avail);
    double price = 0;
    for (int j : set_members(d.set)) price += p[j];
    worst = std::max({worst, std::abs(d.utility - best), std::abs(v.value(d.set) - price - best)});
  }
  return {"demand oracle vs exhaustive search", worst <= 1e-12, "max error " + fmt("%.3g", worst)};
}

}  // namespace

std::vector<CheckResult> run_invariant_checks(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CheckResult> out;
  out.push_back(ladder_check());
  out.push_back(lp_check(rng));
  out.push_back(window_check(rng));
  out.push_back(derivative_check());
  out.push_back(table_check());
  out.push_back(magician_check(rng));
  out.push_back(demand_check(rng));
  return out;
}

}  // namespace xosp
