#include "xosp/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace xosp {

ArrivalOrder ArrivalOrder::identity() { return ArrivalOrder(); }

ArrivalOrder ArrivalOrder::fixed(std::vector<int> perm) {
  ArrivalOrder o;
  o.kind_ = Kind::Fixed;
  o.perm_ = std::move(perm);
  return o;
}

ArrivalOrder ArrivalOrder::reversed() {
  ArrivalOrder o;
  o.kind_ = Kind::Reversed;
  o.name_ = "reversed";
  return o;
}

ArrivalOrder ArrivalOrder::uniform_random() {
  ArrivalOrder o;
  o.kind_ = Kind::Random;
  o.name_ = "random";
  return o;
}

ArrivalOrder ArrivalOrder::scripted(std::string name, Script script) {
  ArrivalOrder o;
  o.kind_ = Kind::Scripted;
  o.name_ = std::move(name);
  o.script_ = std::move(script);
  return o;
}

std::vector<int> ArrivalOrder::produce(const Instance& inst, const Profile& profile, Rng& rng) const {
  const int n = inst.num_buyers();
  std::vector<int> out(n);
  std::iota(out.begin(), out.end(), 0);
  switch (kind_) {
    case Kind::Identity: return out;
    case Kind::Fixed: out = perm_; break;
    case Kind::Reversed: std::reverse(out.begin(), out.end()); return out;
    case Kind::Random:
      for (int i = n - 1; i > 0; --i) std::swap(out[i], out[rng() % static_cast<std::uint64_t>(i + 1)]);
      return out;
    case Kind::Scripted: out = script_(inst, profile); break;
  }
  std::vector<char> seen(n, 0);
  if (static_cast<int>(out.size()) != n) throw std::invalid_argument("arrival order is not a permutation");
  for (int i : out) {
    if (i < 0 || i >= n || seen[i]) throw std::invalid_argument("arrival order is not a permutation");
    seen[i] = 1;
  }
  return out;
}

namespace {

std::vector<int> by_value(const Instance& inst, const Profile& profile, bool ascending) {
  std::vector<int> out(inst.num_buyers());
  std::iota(out.begin(), out.end(), 0);
  std::vector<double> v(out.size());
  for (int i : out) v[i] = inst.buyer(i).atom(profile[i]).valuation.value(full_set(inst.num_items()));
  std::stable_sort(out.begin(), out.end(), [&](int a, int b) { return ascending ? v[a] < v[b] : v[a] > v[b]; });
  return out;
}

struct Accum {
  double welfare = 0, revenue = 0, utility = 0;
  std::vector<double> sold;
  std::vector<std::vector<double>> sellout;
  double worst_certificate = 0;
  long demand_violations = 0;
};

}  // namespace

std::vector<int> low_value_first(const Instance& inst, const Profile& profile) { return by_value(inst, profile, true); }
std::vector<int> high_value_first(const Instance& inst, const Profile& profile) {
  return by_value(inst, profile, false);
}

RatioEstimate estimate_ratio(const Instance& inst, const Mechanism& mech, const ArrivalOrder& order,
                             const Benchmark& benchmark, const EstimateOptions& opts) {
  if (opts.runs < 1) throw std::invalid_argument("need at least one run");
  const int m = inst.num_items();
  const int n = inst.num_buyers();
  std::vector<char> enumerated(n, 0);
  for (int b : opts.enumerated_buyers) {
    if (b < 0 || b >= n) throw std::invalid_argument("enumerated buyer out of range");
    enumerated[b] = 1;
  }
  const int tail = static_cast<int>(opts.enumerated_buyers.size());

  std::vector<Accum> per_run(opts.runs);
  auto do_run = [&](int r) {
    const std::uint64_t seed = derive_seed(opts.seed, static_cast<std::uint64_t>(r));
    Rng rng(seed);
    Profile profile = sample_profile(inst, rng);
    Profile masked = profile;
    for (int b : opts.enumerated_buyers) masked[b] = 0;
    const std::vector<int> ord = order.produce(inst, masked, rng);
    for (int t = n - tail; t < n; ++t)
      if (!enumerated[ord[t]]) throw std::invalid_argument("enumerated buyers must arrive last");

    RunState st = mech.start(inst);
    for (int t = 0; t < n - tail; ++t) mech.serve(st, inst, ord[t], profile[ord[t]], rng);

    Accum acc;
    acc.sold.assign(m, 0.0);
    acc.sellout.resize(m);
    for (int j = 0; j < m; ++j) acc.sellout[j].assign(inst.supply()[j] + 1, 0.0);
    enumerate_atoms(inst, opts.enumerated_buyers, profile, [&](const Profile& q, double w) {
      RunState s = st;
      Rng r2 = rng;
      for (int t = n - tail; t < n; ++t) mech.serve(s, inst, ord[t], q[ord[t]], r2);
      acc.welfare += w * s.market.welfare;
      acc.revenue += w * s.market.revenue;
      acc.utility += w * s.market.utility;
      for (int j = 0; j < m; ++j) {
        acc.sold[j] += w * s.market.sold[j];
        acc.sellout[j][s.market.sold[j]] += w;
      }
      acc.worst_certificate = std::max(acc.worst_certificate, s.worst_certificate);
      acc.demand_violations += s.demand_violations;
    });
    per_run[r] = std::move(acc);
  };

  const int threads = std::max(1, std::min(opts.threads, opts.runs));
  if (threads == 1) {
    for (int r = 0; r < opts.runs; ++r) do_run(r);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (int r = t; r < opts.runs; r += threads) do_run(r);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Reduce in run order so results do not depend on scheduling.
  RatioEstimate est;
  est.runs = opts.runs;
  est.benchmark = benchmark;
  est.mean_sold.assign(m, 0.0);
  est.sellout.resize(m);
  for (int j = 0; j < m; ++j) est.sellout[j].assign(inst.supply()[j] + 1, 0.0);
  double sum = 0, sum2 = 0;
  for (int r = 0; r < opts.runs; ++r) {
    const Accum& a = per_run[r];
    sum += a.welfare;
    sum2 += a.welfare * a.welfare;
    est.revenue += a.revenue;
    est.utility += a.utility;
    for (int j = 0; j < m; ++j) {
      est.mean_sold[j] += a.sold[j];
      for (size_t c = 0; c < a.sellout[j].size(); ++c) est.sellout[j][c] += a.sellout[j][c];
    }
    est.worst_certificate = std::max(est.worst_certificate, a.worst_certificate);
    est.demand_violations += a.demand_violations;
    if (opts.keep_records)
      est.records.push_back({r, derive_seed(opts.seed, static_cast<std::uint64_t>(r)), a.welfare, a.revenue,
                             a.utility, a.sold});
  }
  const double R = opts.runs;
  est.mean = sum / R;
  est.revenue /= R;
  est.utility /= R;
  for (int j = 0; j < m; ++j) {
    est.mean_sold[j] /= R;
    for (double& v : est.sellout[j]) v /= R;
  }
  const double var = opts.runs > 1 ? std::max(0.0, (sum2 - R * est.mean * est.mean) / (R - 1)) : 0.0;
  est.std_error = std::sqrt(var / R);
  const double B = benchmark.value;
  if (B != 0) {
    est.ratio = est.mean / B;
    // Delta method for the quotient of independent estimates.
    const double a = est.std_error / B, b = est.mean * benchmark.std_error / (B * B);
    est.ratio_std_error = std::sqrt(a * a + b * b);
  } else {
    est.ratio = std::nan("");
    est.ratio_std_error = std::nan("");
  }
  return est;
}

std::string to_csv(const RatioEstimate& est) {
  std::string out = "run,seed,welfare,revenue,utility";
  const size_t m = est.mean_sold.size();
  for (size_t j = 0; j < m; ++j) out += ",sold_" + std::to_string(j);
  out += "\n";
  char buf[128];
  for (const RunRecord& r : est.records) {
    std::snprintf(buf, sizeof buf, "%d,%llu,%.12g,%.12g,%.12g", r.run, static_cast<unsigned long long>(r.seed),
                  r.welfare, r.revenue, r.utility);
    out += buf;
    for (double s : r.sold) {
      std::snprintf(buf, sizeof buf, ",%.12g", s);
      out += buf;
    }
    out += "\n";
  }
  out += "mean,stderr,benchmark,ratio,ratio_stderr\n";
  std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g\n", est.mean, est.std_error, est.benchmark.value,
                est.ratio, est.ratio_std_error);
  out += buf;
  return out;
}

}  // namespace xosp
