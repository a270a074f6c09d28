#include "xosp/ex_ante.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xosp/random.hpp"

namespace xosp {

double ExAnteSolution::item_mass(int j) const {
  double s = 0;
  for (const auto& row : z) s += row[j];
  return s;
}

void fill_derived(const Instance& inst, ExAnteSolution& sol) {
  const int n = inst.num_buyers(), m = inst.num_items();
  sol.item_welfare.assign(m, 0.0);
  sol.z.assign(n, std::vector<double>(m, 0.0));
  for (int i = 0; i < n; ++i) {
    const auto& dist = inst.buyer(i);
    for (int a = 0; a < dist.num_atoms(); ++a) {
      const auto& at = dist.atom(a);
      for (const SetMass& sm : sol.x[i][a]) {
        const double* cl = at.valuation.clause(at.valuation.supporting_clause(sm.set));
        for (int j : set_members(sm.set)) {
          sol.item_welfare[j] += at.prob * cl[j] * sm.mass;
          sol.z[i][j] += at.prob * sm.mass;
        }
      }
    }
  }
}

ExAnteSolution solve_ex_ante(const Instance& inst) {
  const int n = inst.num_buyers(), m = inst.num_items();
  if (m > kMaxExAnteItems)
    throw CapError("ex-ante LP enumerates all bundles; " + std::to_string(m) + " items exceeds the cap of " +
                   std::to_string(kMaxExAnteItems));

  struct Column {
    int buyer, atom;
    ItemSet set;
  };
  std::vector<Column> cols;
  std::vector<double> obj;
  int atom_rows = 0;
  for (int i = 0; i < n; ++i) {
    const auto& dist = inst.buyer(i);
    atom_rows += dist.num_atoms();
    for (int a = 0; a < dist.num_atoms(); ++a) {
      const auto& at = dist.atom(a);
      for (ItemSet s = 1; s <= full_set(m) && m > 0; ++s) {
        const double v = at.valuation.value(s);
        if (v <= 0) continue;
        cols.push_back({i, a, s});
        obj.push_back(at.prob * v);
      }
    }
  }
  const std::uint64_t cells = static_cast<std::uint64_t>(cols.size()) * (m + atom_rows);
  if (cells > (std::uint64_t{1} << 26)) throw CapError("ex-ante LP too large for the dense solver");

  ExAnteSolution sol;
  sol.x.resize(n);
  for (int i = 0; i < n; ++i) sol.x[i].resize(inst.buyer(i).num_atoms());

  if (!cols.empty()) {
    LinearProgram lp;
    lp.num_vars = static_cast<int>(cols.size());
    lp.c = obj;
    const int nv = lp.num_vars;
    for (int j = 0; j < m; ++j) {
      std::vector<double> row(nv, 0.0);
      for (int c = 0; c < nv; ++c)
        if (contains(cols[c].set, j)) row[c] = inst.buyer(cols[c].buyer).atom(cols[c].atom).prob;
      lp.add_row(std::move(row), inst.supply()[j]);
    }
    int c0 = 0;
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < inst.buyer(i).num_atoms(); ++a) {
        std::vector<double> row(nv, 0.0);
        int c = c0;
        while (c < nv && cols[c].buyer == i && cols[c].atom == a) row[c++] = 1.0;
        c0 = c;
        lp.add_row(std::move(row), 1.0);
      }
    sol.lp = solve_lp(lp);
    if (sol.lp.status != LpStatus::Optimal)
      throw std::runtime_error("ex-ante LP did not solve: " + to_string(sol.lp.status));
    for (int c = 0; c < nv; ++c) {
      const double xv = sol.lp.primal[c];
      if (xv > 1e-12) sol.x[cols[c].buyer][cols[c].atom].push_back({cols[c].set, std::min(1.0, xv)});
    }
    sol.objective = sol.lp.objective;
  } else {
    sol.lp.status = LpStatus::Optimal;
  }
  fill_derived(inst, sol);
  return sol;
}

ExAnteSolution scaled(const Instance& inst, const ExAnteSolution& sol, double factor) {
  ExAnteSolution out = sol;
  out.objective *= factor;
  for (auto& per_buyer : out.x)
    for (auto& per_atom : per_buyer)
      for (auto& sm : per_atom) sm.mass *= factor;
  fill_derived(inst, out);
  return out;
}

HindsightResult hindsight_opt(const Instance& inst, const Profile& profile) {
  const int n = inst.num_buyers(), m = inst.num_items();
  HindsightResult res;
  res.allocation.assign(n, 0);
  if (n == 0) return res;

  // Supplies beyond n are never binding.
  std::vector<int> cap(m);
  std::vector<std::uint64_t> stride(m + 1, 1);
  for (int j = 0; j < m; ++j) {
    cap[j] = std::min(inst.supply()[j], n);
    stride[j + 1] = stride[j] * (cap[j] + 1);
    if (stride[j + 1] > kHindsightCap) throw CapError("hindsight state space exceeds cap");
  }
  const std::uint64_t states = stride[m];
  const std::uint64_t subsets = std::uint64_t{1} << m;
  if (m >= 40 || static_cast<double>(n) * states * subsets > static_cast<double>(kHindsightCap))
    throw CapError("hindsight optimization work exceeds cap");

  // f[i][s]: best welfare from buyers i.. with remaining supply encoded by s.
  std::vector<double> next(states, 0.0), cur(states);
  std::vector<std::vector<ItemSet>> choice(n, std::vector<ItemSet>(states, 0));
  std::vector<double> vals(subsets);
  for (int i = n - 1; i >= 0; --i) {
    const auto& val = inst.buyer(i).atom(profile[i]).valuation;
    for (ItemSet s = 0; s < subsets; ++s) vals[s] = val.value(s);
    for (std::uint64_t st = 0; st < states; ++st) {
      ItemSet avail = 0;
      for (int j = 0; j < m; ++j)
        if ((st / stride[j]) % (cap[j] + 1) > 0) avail |= singleton(j);
      double best = next[st];
      ItemSet arg = 0;
      for (ItemSet s = avail; s; s = (s - 1) & avail) {
        std::uint64_t ns = st;
        for (int j : set_members(s)) ns -= stride[j];
        const double v = vals[s] + next[ns];
        if (v > best + 1e-12) {
          best = v;
          arg = s;
        }
      }
      cur[st] = best;
      choice[i][st] = arg;
    }
    std::swap(cur, next);
  }
  std::uint64_t st = 0;
  for (int j = 0; j < m; ++j) st += stride[j] * cap[j];
  res.welfare = next[st];
  for (int i = 0; i < n; ++i) {
    res.allocation[i] = choice[i][st];
    for (int j : set_members(res.allocation[i])) st -= stride[j];
  }
  return res;
}

HindsightResult hindsight_opt_unit_demand(const Instance& inst, const Profile& profile) {
  const int n = inst.num_buyers(), m = inst.num_items();
  // Nodes: 0 source, 1..n buyers, n+1..n+m items, n+m+1 sink.
  struct Edge {
    int to, cap;
    double cost;
  };
  const int N = n + m + 2, src = 0, sink = n + m + 1;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> adj(N);
  auto add = [&](int u, int v, int cap, double cost) {
    adj[u].push_back(static_cast<int>(edges.size()));
    edges.push_back({v, cap, cost});
    adj[v].push_back(static_cast<int>(edges.size()));
    edges.push_back({u, 0, -cost});
  };
  for (int i = 0; i < n; ++i) {
    const auto& val = inst.buyer(i).atom(profile[i]).valuation;
    if (!val.is_unit_demand()) throw std::invalid_argument("valuation is not unit-demand");
    add(src, 1 + i, 1, 0.0);
    for (int j = 0; j < m; ++j) {
      const double w = val.item_value(j);
      if (w > 0) add(1 + i, n + 1 + j, 1, -w);
    }
  }
  for (int j = 0; j < m; ++j) add(n + 1 + j, sink, inst.supply()[j], 0.0);

  // Successive shortest paths (Bellman-Ford queue); stop once no path has
  // negative cost, which is exactly when welfare stops improving.
  double total = 0;
  std::vector<double> dist(N);
  std::vector<int> pred(N);
  std::vector<char> inq(N);
  while (true) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(pred.begin(), pred.end(), -1);
    dist[src] = 0;
    std::vector<int> queue{src};
    inq.assign(N, 0);
    inq[src] = 1;
    for (size_t h = 0; h < queue.size(); ++h) {
      const int u = queue[h];
      inq[u] = 0;
      for (int e : adj[u]) {
        const Edge& ed = edges[e];
        if (ed.cap > 0 && dist[u] + ed.cost < dist[ed.to] - 1e-12) {
          dist[ed.to] = dist[u] + ed.cost;
          pred[ed.to] = e;
          if (!inq[ed.to]) {
            inq[ed.to] = 1;
            queue.push_back(ed.to);
          }
        }
      }
    }
    if (!(dist[sink] < -1e-12)) break;
    for (int v = sink; v != src; v = edges[pred[v] ^ 1].to) {
      edges[pred[v]].cap -= 1;
      edges[pred[v] ^ 1].cap += 1;
    }
    total -= dist[sink];
  }

  HindsightResult res;
  res.welfare = total;
  res.allocation.assign(n, 0);
  for (int i = 0; i < n; ++i)
    for (int e : adj[1 + i]) {
      const Edge& ed = edges[e];
      if (ed.to > n && ed.to <= n + m && (e % 2 == 0) && ed.cap == 0) res.allocation[i] |= singleton(ed.to - n - 1);
    }
  return res;
}

namespace {

bool profile_unit_demand(const Instance& inst, const Profile& p) {
  for (int i = 0; i < inst.num_buyers(); ++i)
    if (!inst.buyer(i).atom(p[i]).valuation.is_unit_demand()) return false;
  return true;
}

double hindsight_value(const Instance& inst, const Profile& p) {
  return profile_unit_demand(inst, p) ? hindsight_opt_unit_demand(inst, p).welfare : hindsight_opt(inst, p).welfare;
}

}  // namespace

ProphetEstimate prophet_benchmark(const Instance& inst, const ProphetOptions& opts) {
  if (opts.samples < 1) throw std::invalid_argument("prophet benchmark needs at least one sample");
  double sum = 0, sum2 = 0;
  for (int s = 0; s < opts.samples; ++s) {
    Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(s)));
    Profile p = sample_profile(inst, rng);
    double v = 0;
    enumerate_atoms(inst, opts.enumerated_buyers, p,
                    [&](const Profile& q, double w) { v += w * hindsight_value(inst, q); });
    sum += v;
    sum2 += v * v;
  }
  ProphetEstimate est;
  est.samples = opts.samples;
  est.mean = sum / opts.samples;
  const double var = opts.samples > 1 ? std::max(0.0, (sum2 - opts.samples * est.mean * est.mean) / (opts.samples - 1)) : 0.0;
  est.std_error = std::sqrt(var / opts.samples);
  return est;
}

}  // namespace xosp
