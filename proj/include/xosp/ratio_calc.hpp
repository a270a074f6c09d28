#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace xosp {

// Poisson(lambda) pmf for i = 0..len-1 where len >= cutoff and the tail
// beyond len is below 1e-14. tail = 1 - sum(pmf).
struct PoissonPmf {
  std::vector<double> pmf;
  double tail = 0;
};
PoissonPmf poisson_pmf(double lambda, int cutoff);

// Binomial(n, p) pmf for i = 0..n.
std::vector<double> binomial_pmf(int n, double p);

// Count-law helpers: pmf of the number of arrivals with rate lambda, either
// Poisson (n empty) or Binomial(n, lambda/n). Entries up to at least `need`.
std::vector<double> count_pmf(double lambda, std::optional<int> n, int need);

// Single-item quantities.
double mu_k(double lambda, int k, std::optional<int> n = std::nullopt);
double delta_k(double lambda, int k, std::optional<int> n = std::nullopt);

// Two-item (upper-regime) quantities.
double mu_hat_k(double lambda, int k, std::optional<int> n = std::nullopt);
double delta_hat_k(double lambda, int k, std::optional<int> n = std::nullopt);
double d_mu_hat(double lambda, int k);
double d_delta_hat(double lambda, int k);

// Pr[Binom(i, 1/2) < k] for i = 0..len-1.
std::vector<double> half_binomial_below(int k, int len);

struct RatioReport {
  int k = 0;
  double lambda_star = 0;
  double tau = 0;
  double lambda_hat_star = 0;
  double lambda_hat_prime = 0;
  double tau_hat = 0;
  double mu_at_star = 0, delta_at_star = 0;
  double mu_hat_at = 0, delta_hat_at = 0;
  int iterations_star = 0, iterations_hat = 0, iterations_prime = 0;
};

RatioReport compute_tau(int k);
RatioReport compute_tau_hat(int k);
RatioReport compute_ratios(int k);

// Bisection for a sign change of f on [lo, hi] to width tol.
struct Root {
  double x = 0;
  int iterations = 0;
};
Root bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-9);

// Weight alpha in f = alpha*mu_hat + (1-alpha)*delta_hat minimizing the
// maximum over lambda.
double two_item_minimax_alpha(int k);
// Same for the single-item tradeoff alpha*mu + (1-alpha)*delta.
double single_item_minimax_alpha(int k);
// Large-buyer scale whose welfare ratio (k mu + U delta)/(k + U) puts weight
// alpha on mu, so alpha = k/(k+U).
inline double large_scale(double alpha, int k) { return k * (1.0 - alpha) / alpha; }

// Lower-regime quantities with type counts X_(1) ~ rate l1, X_(1,2) ~ l12.
double mu_prime(double l1, double l12, int k, std::optional<int> n = std::nullopt);
double delta_prime(double l1, double l12, int k, std::optional<int> n = std::nullopt);
// Split-regime quantities with X_(1,2) ~ l12, X_(2,1) ~ l21.
double mu_dprime(double l12, double l21, int k, std::optional<int> n = std::nullopt);
double delta_dprime(double l12, double l21, int k, std::optional<int> n = std::nullopt);

// Derivative identity for sum_{i=a}^b f(i) C(n,i) p^i (1-p)^(n-i).
struct WindowDerivativeCheck {
  double lhs = 0;  // central finite difference
  double rhs = 0;  // closed form
  double error() const;
};
double binomial_window_sum(const std::vector<double>& f, int a, int b, int n, double p);
double binomial_window_derivative(const std::vector<double>& f, int a, int b, int n, double p);
WindowDerivativeCheck window_derivative_check(const std::vector<double>& f, int a, int b, int n, double p);

// f(alpha, lambda) = alpha*mu_hat + (1-alpha)*delta_hat sampled on `grid`
// points of [0, hi]; hi defaults to n (finite) or 10k.
struct UnimodalityReport {
  bool unimodal = true;
  int sign_changes = 0;
  double argmax = 0;
  double max = 0;
};
UnimodalityReport unimodality_scan(double alpha, int k, std::optional<int> n, int grid);

}  // namespace xosp
