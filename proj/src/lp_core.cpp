#include "xosp/lp_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xosp {

int LinearProgram::add_row(std::vector<double> row, double rhs) {
  if (static_cast<int>(row.size()) != num_vars) throw std::invalid_argument("row length mismatch");
  A.push_back(std::move(row));
  b.push_back(rhs);
  return static_cast<int>(A.size()) - 1;
}

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

double LpCertificate::worst() const {
  return std::max({primal_violation, dual_violation, duality_gap, slackness});
}

namespace {

struct Tableau {
  int rows = 0, cols = 0;  // constraint rows, structural+slack+artificial columns
  std::vector<double> t;   // (rows+1) x (cols+1), objective row last, rhs column last
  std::vector<int> basis;

  double& at(int r, int c) { return t[static_cast<size_t>(r) * (cols + 1) + c]; }
  double at(int r, int c) const { return t[static_cast<size_t>(r) * (cols + 1) + c]; }
  double& rhs(int r) { return at(r, cols); }
  double& obj(int c) { return at(rows, c); }

  void pivot(int pr, int pc) {
    const double p = at(pr, pc);
    for (int c = 0; c <= cols; ++c) at(pr, c) /= p;
    at(pr, pc) = 1.0;
    for (int r = 0; r <= rows; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      double* dst = &t[static_cast<size_t>(r) * (cols + 1)];
      const double* src = &t[static_cast<size_t>(pr) * (cols + 1)];
      for (int c = 0; c <= cols; ++c) dst[c] -= f * src[c];
      dst[pc] = 0.0;
    }
    basis[pr] = pc;
  }

  // Bland's rule on the objective row: entering = lowest index with negative
  // reduced cost, leaving = lowest basis index among minimum ratios.
  LpStatus run(const std::vector<char>& allowed, double tol, int& iters, int max_iters) {
    while (true) {
      int enter = -1;
      for (int c = 0; c < cols; ++c)
        if (allowed[c] && obj(c) < -tol) {
          enter = c;
          break;
        }
      if (enter < 0) return LpStatus::Optimal;
      if (iters >= max_iters) return LpStatus::IterationLimit;
      int leave = -1;
      double best = kInf;
      for (int r = 0; r < rows; ++r) {
        const double a = at(r, enter);
        if (a <= tol) continue;
        const double ratio = rhs(r) / a;
        if (leave < 0 || ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && basis[r] < basis[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
      ++iters;
    }
  }
};

}  // namespace

LpCertificate certify(const LinearProgram& lp, const std::vector<double>& y, const std::vector<double>& rho,
                      const std::vector<double>& sigma) {
  LpCertificate cert;
  const int n = lp.num_vars;
  const int m = static_cast<int>(lp.A.size());
  const bool has_upper = !lp.upper.empty();
  double primal_obj = 0, dual_obj = 0;
  for (int j = 0; j < n; ++j) primal_obj += lp.c[j] * y[j];
  for (int i = 0; i < m; ++i) {
    double ay = 0;
    for (int j = 0; j < n; ++j) ay += lp.A[i][j] * y[j];
    cert.primal_violation = std::max(cert.primal_violation, ay - lp.b[i]);
    cert.dual_violation = std::max(cert.dual_violation, -rho[i]);
    cert.slackness = std::max(cert.slackness, std::abs(rho[i] * (lp.b[i] - ay)));
    dual_obj += lp.b[i] * rho[i];
  }
  for (int j = 0; j < n; ++j) {
    cert.primal_violation = std::max(cert.primal_violation, -y[j]);
    double col = 0;
    for (int i = 0; i < m; ++i) col += lp.A[i][j] * rho[i];
    const double u = has_upper ? lp.upper[j] : kInf;
    const double s = std::isfinite(u) ? sigma[j] : 0.0;
    if (std::isfinite(u)) {
      cert.primal_violation = std::max(cert.primal_violation, y[j] - u);
      cert.dual_violation = std::max(cert.dual_violation, -s);
      cert.slackness = std::max(cert.slackness, std::abs(s * (u - y[j])));
      dual_obj += u * s;
    }
    const double reduced = col + s - lp.c[j];
    cert.dual_violation = std::max(cert.dual_violation, -reduced);
    cert.slackness = std::max(cert.slackness, std::abs(y[j] * reduced));
  }
  cert.duality_gap = std::abs(primal_obj - dual_obj);
  return cert;
}

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opts) {
  const int n = lp.num_vars;
  if (static_cast<int>(lp.c.size()) != n) throw std::invalid_argument("objective length mismatch");
  if (lp.A.size() != lp.b.size()) throw std::invalid_argument("row/rhs count mismatch");
  if (!lp.upper.empty() && static_cast<int>(lp.upper.size()) != n)
    throw std::invalid_argument("upper bound length mismatch");

  // Gather rows: the explicit ones, then one per finite upper bound.
  std::vector<const std::vector<double>*> row_ptr;
  std::vector<double> rhs;
  std::vector<int> bound_var;
  for (size_t i = 0; i < lp.A.size(); ++i) {
    if (static_cast<int>(lp.A[i].size()) != n) throw std::invalid_argument("row length mismatch");
    row_ptr.push_back(&lp.A[i]);
    rhs.push_back(lp.b[i]);
    bound_var.push_back(-1);
  }
  if (!lp.upper.empty())
    for (int j = 0; j < n; ++j)
      if (std::isfinite(lp.upper[j])) {
        row_ptr.push_back(nullptr);
        rhs.push_back(lp.upper[j]);
        bound_var.push_back(j);
      }

  const int R = static_cast<int>(rhs.size());
  std::vector<int> art_row;
  for (int r = 0; r < R; ++r)
    if (rhs[r] < 0) art_row.push_back(r);
  const int A = static_cast<int>(art_row.size());

  Tableau tab;
  tab.rows = R;
  tab.cols = n + R + A;
  tab.t.assign(static_cast<size_t>(R + 1) * (tab.cols + 1), 0.0);
  tab.basis.assign(R, -1);
  int ai = 0;
  for (int r = 0; r < R; ++r) {
    const double sign = rhs[r] < 0 ? -1.0 : 1.0;
    if (row_ptr[r])
      for (int j = 0; j < n; ++j) tab.at(r, j) = sign * (*row_ptr[r])[j];
    else
      tab.at(r, bound_var[r]) = sign;
    tab.at(r, n + r) = sign;
    tab.rhs(r) = sign * rhs[r];
    if (sign < 0) {
      tab.at(r, n + R + ai) = 1.0;
      tab.basis[r] = n + R + ai;
      ++ai;
    } else {
      tab.basis[r] = n + r;
    }
  }

  LpSolution sol;
  std::vector<char> allowed(tab.cols, 1);
  int iters = 0;

  if (A > 0) {
    // Phase 1: maximize -sum(artificials).
    for (int r : art_row)
      for (int c = 0; c <= tab.cols; ++c) tab.obj(c) -= tab.at(r, c);
    for (int k = 0; k < A; ++k) tab.obj(n + R + k) = 0.0;
    LpStatus st = tab.run(allowed, opts.pivot_tol, iters, opts.max_iterations);
    if (st == LpStatus::IterationLimit) {
      sol.status = st;
      sol.iterations = iters;
      return sol;
    }
    if (tab.obj(tab.cols) < -1e-9 * std::max(1.0, static_cast<double>(R))) {
      sol.status = LpStatus::Infeasible;
      sol.iterations = iters;
      return sol;
    }
    // Drive remaining artificials out of the basis where possible.
    for (int r = 0; r < R; ++r) {
      if (tab.basis[r] < n + R) continue;
      for (int c = 0; c < n + R; ++c)
        if (std::abs(tab.at(r, c)) > opts.pivot_tol) {
          tab.pivot(r, c);
          break;
        }
    }
    for (int k = 0; k < A; ++k) allowed[n + R + k] = 0;
    for (int c = 0; c <= tab.cols; ++c) tab.obj(c) = 0.0;
  }

  // Phase 2 objective row: z_j = c_B B^-1 a_j - c_j.
  for (int j = 0; j < n; ++j) tab.obj(j) = -lp.c[j];
  for (int r = 0; r < R; ++r) {
    const int bv = tab.basis[r];
    const double cb = bv < n ? lp.c[bv] : 0.0;
    if (cb == 0.0) continue;
    for (int c = 0; c <= tab.cols; ++c) tab.obj(c) += cb * tab.at(r, c);
  }
  LpStatus st = tab.run(allowed, opts.pivot_tol, iters, opts.max_iterations);
  sol.status = st;
  sol.iterations = iters;
  if (st != LpStatus::Optimal) return sol;

  sol.primal.assign(n, 0.0);
  for (int r = 0; r < R; ++r)
    if (tab.basis[r] < n) sol.primal[tab.basis[r]] = std::max(0.0, tab.rhs(r));
  sol.row_duals.assign(lp.A.size(), 0.0);
  sol.bound_duals.assign(n, 0.0);
  for (int r = 0; r < R; ++r) {
    const double d = std::max(0.0, tab.obj(n + r));
    if (bound_var[r] < 0)
      sol.row_duals[r] = d;
    else
      sol.bound_duals[bound_var[r]] = d;
  }
  sol.objective = 0;
  for (int j = 0; j < n; ++j) sol.objective += lp.c[j] * sol.primal[j];
  sol.certificate = certify(lp, sol.primal, sol.row_duals, sol.bound_duals);
  return sol;
}

}  // namespace xosp
