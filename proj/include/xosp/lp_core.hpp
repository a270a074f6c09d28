#pragma once

#include <limits>
#include <string>
#include <vector>

namespace xosp {

constexpr double kInf = std::numeric_limits<double>::infinity();

// maximize c.y  subject to  A y <= b,  0 <= y <= upper.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> c;
  std::vector<std::vector<double>> A;  // dense rows of length num_vars
  std::vector<double> b;
  std::vector<double> upper;  // empty means no upper bounds

  int add_row(std::vector<double> row, double rhs);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };
std::string to_string(LpStatus s);

struct LpCertificate {
  double primal_violation = 0;  // max(A y - b, y - u, -y)
  double dual_violation = 0;    // max(c - A'rho - sigma, -rho, -sigma)
  double duality_gap = 0;       // |c.y - (b.rho + u.sigma)|
  double slackness = 0;         // max complementary product
  double worst() const;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0;
  std::vector<double> primal;
  std::vector<double> row_duals;    // one per row of A
  std::vector<double> bound_duals;  // one per variable; 0 when unbounded above
  int iterations = 0;
  LpCertificate certificate;
};

struct LpOptions {
  double pivot_tol = 1e-9;
  int max_iterations = 200000;
};

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opts = {});

// Recomputes the certificate of a candidate primal/dual pair.
LpCertificate certify(const LinearProgram& lp, const std::vector<double>& y, const std::vector<double>& rho,
                      const std::vector<double>& sigma);

}  // namespace xosp
