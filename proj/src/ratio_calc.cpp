#include "xosp/ratio_calc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace xosp {

namespace {

// First `len` Poisson probabilities, log-domain recurrence from p_0 so that
// large rates do not underflow p_0.
std::vector<double> poisson_head(double lambda, int len) {
  std::vector<double> p(std::max(len, 0), 0.0);
  if (len <= 0) return p;
  if (lambda <= 0) {
    p[0] = 1.0;
    return p;
  }
  const double ll = std::log(lambda);
  double lp = -lambda;
  int i = 0;
  for (; i < len && lp < -600.0; ++i) {
    p[i] = std::exp(lp);
    lp += ll - std::log(i + 1.0);
  }
  if (i < len) p[i] = std::exp(lp);
  for (++i; i < len; ++i) p[i] = p[i - 1] * lambda / i;
  return p;
}

double log_choose(int n, int i) { return std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0); }

double choose(int n, int i) {
  if (i < 0 || i > n) return 0.0;
  return std::round(std::exp(log_choose(n, i)));
}

// Pr[Binom(x, q) < k].
double binom_cdf_below(int x, double q, int k) {
  if (k <= 0) return 0.0;
  if (k > x) return 1.0;
  const auto pmf = binomial_pmf(x, q);
  double s = 0;
  for (int i = 0; i < k; ++i) s += pmf[i];
  return std::min(1.0, s);
}

// Support length to sum over for an arrival count with rate lambda.
int support_length(double lambda, std::optional<int> n, int need) {
  if (n) return *n + 1;
  return std::max(need, static_cast<int>(lambda + 40.0 * std::sqrt(lambda + 1.0) + 50.0));
}

}  // namespace

PoissonPmf poisson_pmf(double lambda, int cutoff) {
  if (lambda < 0 || !std::isfinite(lambda)) throw std::invalid_argument("Poisson rate must be finite and >= 0");
  PoissonPmf out;
  if (lambda == 0) {
    out.pmf.assign(std::max(cutoff, 1), 0.0);
    out.pmf[0] = 1.0;
    return out;
  }
  const double ll = std::log(lambda);
  double lp = -lambda, sum = 0;
  for (int i = 0;; ++i) {
    const double p = std::exp(lp);
    out.pmf.push_back(p);
    sum += p;
    lp += ll - std::log(i + 1.0);
    if (i + 1 < cutoff || i + 2 <= lambda) continue;
    // Terms past i+1 shrink geometrically by lambda/(i+2) or faster.
    const double rest = std::exp(lp) / (1.0 - lambda / (i + 2.0));
    if (rest < 1e-14) break;
  }
  out.tail = std::max(0.0, 1.0 - sum);
  return out;
}

std::vector<double> binomial_pmf(int n, double p) {
  if (n < 0) throw std::invalid_argument("negative binomial size");
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("binomial probability outside [0,1]");
  std::vector<double> out(n + 1, 0.0);
  if (p == 0) {
    out[0] = 1;
    return out;
  }
  if (p == 1) {
    out[n] = 1;
    return out;
  }
  const double lp = std::log(p), lq = std::log1p(-p);
  for (int i = 0; i <= n; ++i) out[i] = std::exp(log_choose(n, i) + i * lp + (n - i) * lq);
  return out;
}

std::vector<double> count_pmf(double lambda, std::optional<int> n, int need) {
  if (!n) return poisson_head(lambda, need);
  if (*n < 1) throw std::invalid_argument("population must be positive");
  if (lambda > *n + 1e-12) throw std::invalid_argument("rate exceeds population");
  auto pmf = binomial_pmf(*n, std::min(1.0, lambda / *n));
  if (static_cast<int>(pmf.size()) < need) pmf.resize(need, 0.0);
  return pmf;
}

double mu_k(double lambda, int k, std::optional<int> n) {
  const auto p = count_pmf(lambda, n, k);
  double head = 0, mass = 0;
  for (int i = 0; i < k; ++i) {
    head += i * p[i];
    mass += p[i];
  }
  return (head + k * std::max(0.0, 1.0 - mass)) / k;
}

double delta_k(double lambda, int k, std::optional<int> n) {
  const auto p = count_pmf(lambda, n, k);
  double mass = 0;
  for (int i = 0; i < k; ++i) mass += p[i];
  return std::min(1.0, mass);
}

std::vector<double> half_binomial_below(int k, int len) {
  std::vector<double> B(std::max(len, 0), 1.0);
  double at = k < len ? std::exp(-(k - 1) * std::log(2.0)) : 0.0;
  for (int i = k; i < len; ++i) {
    // Pr[Bin(i) <= k-1] = Pr[Bin(i-1) <= k-1] - Pr[Bin(i-1) = k-1] / 2,
    // at = C(i-1, k-1) / 2^(i-1).
    B[i] = B[i - 1] - 0.5 * at;
    at *= 0.5 * i / (i - k + 1);
  }
  return B;
}

double mu_hat_k(double lambda, int k, std::optional<int> n) { return mu_k(lambda, 2 * k, n); }

double delta_hat_k(double lambda, int k, std::optional<int> n) {
  const auto p = count_pmf(lambda, n, 2 * k);
  const auto B = half_binomial_below(k, 2 * k);
  double s = 0;
  for (int i = 0; i < 2 * k; ++i) s += p[i] * B[i];
  return s;
}

double d_mu_hat(double lambda, int k) {
  const auto p = poisson_head(lambda, 2 * k);
  double s = 0;
  for (double v : p) s += v;
  return s / (2 * k);
}

double d_delta_hat(double lambda, int k) {
  // d/dl p_i = p_{i-1} - p_i.
  const auto p = poisson_head(lambda, 2 * k);
  const auto B = half_binomial_below(k, 2 * k);
  double s = 0;
  for (int i = 0; i + 1 < 2 * k; ++i) s += p[i] * (B[i + 1] - B[i]);
  s -= p[2 * k - 1] * B[2 * k - 1];
  return s;
}

Root bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0) return {lo, 0};
  if (fhi == 0) return {hi, 0};
  if ((flo > 0) == (fhi > 0)) throw std::runtime_error("bisection interval does not bracket a root");
  Root r;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    ++r.iterations;
    if (fm == 0) {
      lo = hi = mid;
      break;
    }
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  r.x = 0.5 * (lo + hi);
  return r;
}

RatioReport compute_tau(int k) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  RatioReport r;
  r.k = k;
  const Root root = bisect([k](double l) { return mu_k(l, k) - delta_k(l, k); }, 0.0, 5.0 * k);
  r.lambda_star = root.x;
  r.iterations_star = root.iterations;
  r.mu_at_star = mu_k(root.x, k);
  r.delta_at_star = delta_k(root.x, k);
  r.tau = r.mu_at_star;
  return r;
}

RatioReport compute_tau_hat(int k) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  RatioReport r;
  r.k = k;
  const Root star = bisect([k](double l) { return mu_hat_k(l, k) - delta_hat_k(l, k); }, 0.0, 10.0 * k);
  r.lambda_hat_star = star.x;
  r.iterations_hat = star.iterations;

  // Pre-scan for the first + to - change of the derivative of mu_hat+delta_hat.
  auto g = [k](double l) { return d_mu_hat(l, k) + d_delta_hat(l, k); };
  const int steps = 400;
  const double hi = 10.0 * k;
  r.lambda_hat_prime = 0;
  double prev_x = hi / steps, prev = g(prev_x);
  for (int s = 2; s <= steps; ++s) {
    const double x = hi * s / steps;
    const double v = g(x);
    if (prev > 1e-15 && v < -1e-15) {
      const Root pr = bisect(g, prev_x, x);
      r.lambda_hat_prime = pr.x;
      r.iterations_prime = pr.iterations;
      break;
    }
    prev_x = x;
    prev = v;
  }
  const double at = std::max(r.lambda_hat_star, r.lambda_hat_prime);
  r.mu_hat_at = mu_hat_k(at, k);
  r.delta_hat_at = delta_hat_k(at, k);
  r.tau_hat = 0.5 * (r.mu_hat_at + r.delta_hat_at);
  return r;
}

RatioReport compute_ratios(int k) {
  RatioReport a = compute_tau(k);
  const RatioReport b = compute_tau_hat(k);
  a.lambda_hat_star = b.lambda_hat_star;
  a.lambda_hat_prime = b.lambda_hat_prime;
  a.tau_hat = b.tau_hat;
  a.mu_hat_at = b.mu_hat_at;
  a.delta_hat_at = b.delta_hat_at;
  a.iterations_hat = b.iterations_hat;
  a.iterations_prime = b.iterations_prime;
  return a;
}

double two_item_minimax_alpha(int k) {
  const RatioReport r = compute_tau_hat(k);
  if (r.lambda_hat_star < r.lambda_hat_prime) return 0.5;
  const double l = r.lambda_hat_star;
  const double dm = d_mu_hat(l, k), dd = d_delta_hat(l, k);
  return -dd / (dm - dd);
}

double single_item_minimax_alpha(int k) {
  const RatioReport r = compute_tau(k);
  const auto p = poisson_head(r.lambda_star, k);
  double below = 0;
  for (double v : p) below += v;
  const double dm = below / k, dd = -p[k - 1];
  return -dd / (dm - dd);
}

double mu_prime(double l1, double l12, int k, std::optional<int> n) {
  const double lam = l1 + l12;
  if (lam <= 0) return 0.0;
  const double q = l12 / lam;
  const int len = support_length(lam, n, 2 * k);
  const auto px = count_pmf(lam, n, len);
  double s = 0;
  for (int x = 0; x < static_cast<int>(px.size()); ++x) {
    if (px[x] < 1e-300) continue;
    const double g = x / (2.0 * k);
    if (x < k) {
      s += px[x] * g;
      continue;
    }
    const double H = binom_cdf_below(x, q, k);
    s += px[x] * (x < 2 * k ? 0.5 * H + (1 - H) * g : 0.5 * H + (1 - H));
  }
  return s;
}

double delta_prime(double l1, double l12, int k, std::optional<int> n) {
  const double lam = l1 + l12;
  if (lam <= 0) return 1.0;
  const double q = l12 / lam;
  const int len = support_length(lam, n, 2 * k);
  const auto px = count_pmf(lam, n, len);
  double s = 0;
  for (int x = 0; x < static_cast<int>(px.size()); ++x) {
    if (px[x] < 1e-300) continue;
    if (x < k)
      s += px[x];
    else if (x < 2 * k)
      s += 0.5 * px[x];
    else
      s += px[x] * 0.5 * binom_cdf_below(x, q, k);
  }
  return s;
}

double mu_dprime(double l12, double l21, int k, std::optional<int> n) {
  const double lam = l12 + l21;
  if (lam <= 0) return 0.0;
  const int len = support_length(lam, n, 2 * k);
  const auto pt = count_pmf(lam, n, len);
  double s = 0, mass = 0;
  for (int t = 0; t < 2 * k; ++t) {
    s += t * pt[t];
    mass += pt[t];
  }
  return (s + 2.0 * k * std::max(0.0, 1.0 - mass)) / (2.0 * k);
}

double delta_dprime(double l12, double l21, int k, std::optional<int> n) {
  const double lam = l12 + l21;
  if (lam <= 0) return 1.0;
  const double q = l12 / lam;
  const auto pt = count_pmf(lam, n, 2 * k);
  double s = 0;
  for (int t = 0; t < 2 * k && t < static_cast<int>(pt.size()); ++t) {
    const auto pmf = binomial_pmf(t, q);
    double a = 0, b = 0;  // Pr[X12 < k], Pr[X21 < k] = Pr[X12 > t-k]
    for (int y = 0; y <= t; ++y) {
      if (y < k) a += pmf[y];
      if (y > t - k) b += pmf[y];
    }
    s += pt[t] * 0.5 * (a + b);
  }
  return s;
}

double WindowDerivativeCheck::error() const { return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)); }

double binomial_window_sum(const std::vector<double>& f, int a, int b, int n, double p) {
  double s = 0;
  for (int i = a; i <= b; ++i) s += f[i] * choose(n, i) * std::pow(p, i) * std::pow(1 - p, n - i);
  return s;
}

double binomial_window_derivative(const std::vector<double>& f, int a, int b, int n, double p) {
  if (a < 0 || b > n || a > b) throw std::invalid_argument("bad summation window");
  double s = 0;
  if (a > 0) s += a * f[a] * choose(n, a) * std::pow(p, a - 1) * std::pow(1 - p, n - a);
  if (b < n) s -= (n - b) * f[b] * choose(n, b) * std::pow(p, b) * std::pow(1 - p, n - b - 1);
  for (int i = a; i < b; ++i)
    s += (f[i + 1] - f[i]) * choose(n, i + 1) * (i + 1) * std::pow(p, i) * std::pow(1 - p, n - i - 1);
  return s;
}

WindowDerivativeCheck window_derivative_check(const std::vector<double>& f, int a, int b, int n, double p) {
  if (!(p > 0 && p < 1)) throw std::invalid_argument("p must lie in (0,1)");
  if (static_cast<int>(f.size()) < n + 1) throw std::invalid_argument("f must cover 0..n");
  const double h = std::min(1e-3, 0.25 * std::min(p, 1 - p));
  auto F = [&](double x) { return binomial_window_sum(f, a, b, n, x); };
  WindowDerivativeCheck c;
  c.lhs = (-F(p + 2 * h) + 8 * F(p + h) - 8 * F(p - h) + F(p - 2 * h)) / (12 * h);
  c.rhs = binomial_window_derivative(f, a, b, n, p);
  return c;
}

UnimodalityReport unimodality_scan(double alpha, int k, std::optional<int> n, int grid) {
  if (grid < 3) throw std::invalid_argument("grid needs at least 3 points");
  const double hi = n ? static_cast<double>(*n) : 10.0 * k;
  std::vector<double> f(grid);
  UnimodalityReport rep;
  rep.max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double l = hi * i / (grid - 1);
    f[i] = alpha * mu_hat_k(l, k, n) + (1 - alpha) * delta_hat_k(l, k, n);
    if (f[i] > rep.max) {
      rep.max = f[i];
      rep.argmax = l;
    }
  }
  int last = 0;
  bool seen_down = false;
  for (int i = 1; i < grid; ++i) {
    const double d = f[i] - f[i - 1];
    if (std::abs(d) <= 1e-12) continue;
    const int s = d > 0 ? 1 : -1;
    if (last != 0 && s != last) ++rep.sign_changes;
    if (s < 0) seen_down = true;
    if (s > 0 && seen_down) rep.unimodal = false;
    last = s;
  }
  return rep;
}

}  // namespace xosp
