#pragma once

// Legendre-polynomial smoothing kernels K(r) on [-1, 1] and the quadrature
// used to check their moment conditions under r ~ Uniform[-1, 1].
//
// The order-b kernel is K(r) = C * sum_{m=0}^{b} p'_m(0) p_m(r) with
// p_m = sqrt(2m+1) L_m. Only odd m contribute, so K is odd and is stored as
// coefficients of r, r^3, ..., r^b. It satisfies E[r K(r)] = C and
// E[r^j K(r)] = 0 for 2 <= j <= b.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kerzoo {

class insufficient_quadrature : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// L_m(r) by the Bonnet recurrence (m+1) L_{m+1} = (2m+1) r L_m - m L_{m-1}.
inline double legendre_eval(unsigned m, double r) noexcept {
  if (m == 0) return 1.0;
  if (m == 1) return r;
  double prev = 1.0;
  double cur = r;
  for (unsigned k = 1; k < m; ++k) {
    const double next = ((2.0 * k + 1.0) * r * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// L'_m(0) from L'_{m+1}(0) = L'_{m-1}(0) + (2m+1) L_m(0) and
/// L_{m+1}(0) = -m/(m+1) L_{m-1}(0).
inline double legendre_deriv_at_zero(unsigned m) noexcept {
  if (m == 0) return 0.0;
  double value_prev = 1.0, value_cur = 0.0;  // L_{k-1}(0), L_k(0)
  double slope_prev = 0.0, slope_cur = 1.0;  // L'_{k-1}(0), L'_k(0)
  for (unsigned k = 1; k < m; ++k) {
    const double value_next = -static_cast<double>(k) / (k + 1.0) * value_prev;
    const double slope_next = slope_prev + (2.0 * k + 1.0) * value_cur;
    value_prev = value_cur;
    value_cur = value_next;
    slope_prev = slope_cur;
    slope_cur = slope_next;
  }
  return slope_cur;
}

/// p'_m(0) for the normalized polynomial p_m = sqrt(2m+1) L_m.
inline double normalized_legendre_deriv_at_zero(unsigned m) noexcept {
  return std::sqrt(2.0 * m + 1.0) * legendre_deriv_at_zero(m);
}

/// Monomial coefficients of L_m, lowest power first.
inline std::vector<double> legendre_coefficients(unsigned m) {
  std::vector<double> prev{1.0};
  if (m == 0) return prev;
  std::vector<double> cur{0.0, 1.0};
  for (unsigned k = 1; k < m; ++k) {
    std::vector<double> next(k + 2, 0.0);
    for (std::size_t j = 0; j < cur.size(); ++j) next[j + 1] += (2.0 * k + 1.0) * cur[j];
    for (std::size_t j = 0; j < prev.size(); ++j) next[j] -= k * prev[j];
    for (double& c : next) c /= (k + 1.0);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// Nodes and positive weights on [-1, 1]; integrates polynomials of degree
/// <= exact_degree exactly.
struct quadrature_rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int exact_degree = -1;

  std::size_t size() const noexcept { return nodes.size(); }

  /// Integral of f over [-1, 1].
  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }

  /// E[f(r)] for r ~ Uniform[-1, 1].
  template <class F>
  double expectation(F&& f) const {
    return 0.5 * integrate(std::forward<F>(f));
  }
};

/// m-node Gauss-Legendre rule (exact through degree 2m-1). Nodes are the
/// Newton-refined roots of L_m, symmetric about zero.
inline quadrature_rule gauss_legendre(std::size_t m) {
  if (m == 0) throw std::invalid_argument("gauss_legendre: need at least one node");
  quadrature_rule rule;
  rule.nodes.assign(m, 0.0);
  rule.weights.assign(m, 0.0);
  rule.exact_degree = static_cast<int>(2 * m - 1);
  const auto n = static_cast<unsigned>(m);
  for (unsigned i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double deriv = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      const double p = legendre_eval(n, x);
      const double q = legendre_eval(n - 1, x);
      deriv = n * (x * p - q) / (x * x - 1.0);
      const double dx = p / deriv;
      x -= dx;
      if (std::abs(dx) <= 1e-16) break;
    }
    const double p = legendre_eval(n, x);
    const double q = legendre_eval(n - 1, x);
    deriv = n * (x * p - q) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * deriv * deriv);
    rule.nodes[i] = -x;
    rule.nodes[m - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

/// The 64-node rule used for all moment checks.
inline const quadrature_rule& default_rule() {
  static const quadrature_rule rule = gauss_legendre(64);
  return rule;
}

/// Odd smoothing kernel stored as coefficients of r^1, r^3, ..., r^order.
struct kernel_spec {
  int order = 0;
  double constant = 0.0;
  std::vector<double> mono_coeffs;

  /// Horner pass in r^2; K(-r) == -K(r) holds bit-exactly.
  double operator()(double r) const noexcept {
    const double r2 = r * r;
    double acc = 0.0;
    for (auto it = mono_coeffs.rbegin(); it != mono_coeffs.rend(); ++it) acc = acc * r2 + *it;
    return r * acc;
  }

  bool operator==(const kernel_spec&) const = default;
};

inline void validate_kernel_parameters(int order, double constant) {
  if (order < 1 || order % 2 == 0)
    throw std::invalid_argument("kernel order must be an odd integer >= 1, got " +
                                std::to_string(order));
  if (!(constant > 0.0) || !std::isfinite(constant))
    throw std::invalid_argument("kernel constant must be positive and finite");
}

inline kernel_spec construct_kernel(int order, double constant) {
  validate_kernel_parameters(order, constant);
  std::vector<double> full(static_cast<std::size_t>(order) + 1, 0.0);
  for (unsigned m = 1; m <= static_cast<unsigned>(order); m += 2) {
    // p'_m(0) p_m(r) = (2m+1) L'_m(0) L_m(r); no square roots survive.
    const double scale = (2.0 * m + 1.0) * legendre_deriv_at_zero(m);
    const auto coeffs = legendre_coefficients(m);
    for (std::size_t j = 0; j < coeffs.size(); ++j) full[j] += scale * coeffs[j];
  }
  kernel_spec k;
  k.order = order;
  k.constant = constant;
  for (std::size_t j = 1; j < full.size(); j += 2) k.mono_coeffs.push_back(constant * full[j]);
  return k;
}

struct moment_row {
  int power = 0;
  double expectation = 0.0;     // E[r^j K(r)], r ~ Uniform[-1, 1]
  double plain_integral = 0.0;  // integral over [-1, 1] without the 1/2 density
  double target = 0.0;
  bool pass = false;
};

struct moment_report {
  std::vector<moment_row> rows;
  double tolerance = 0.0;

  bool all_pass() const noexcept {
    for (const auto& row : rows)
      if (!row.pass) return false;
    return !rows.empty();
  }
};

inline void require_degree(const kernel_spec& kernel, const quadrature_rule& rule) {
  const int needed = 2 * kernel.order + 2;
  if (rule.exact_degree < needed)
    throw insufficient_quadrature("quadrature rule exact to degree " +
                                  std::to_string(rule.exact_degree) + ", need " +
                                  std::to_string(needed));
}

/// E[r^j K(r)] for j = 0..order against targets (C at j = 1, zero elsewhere).
inline moment_report check_moments(const kernel_spec& kernel, const quadrature_rule& rule,
                                   double tolerance = 1e-10) {
  require_degree(kernel, rule);
  moment_report report;
  report.tolerance = tolerance;
  for (int j = 0; j <= kernel.order; ++j) {
    moment_row row;
    row.power = j;
    row.plain_integral = rule.integrate([&](double r) { return std::pow(r, j) * kernel(r); });
    row.expectation = 0.5 * row.plain_integral;
    row.target = j == 1 ? kernel.constant : 0.0;
    row.pass = std::abs(row.expectation - row.target) <= tolerance;
    report.rows.push_back(row);
  }
  return report;
}

/// E[(r K(r))^2], the variance proxy of the kernel-weighted estimator.
inline double kernel_second_moment(const kernel_spec& kernel, const quadrature_rule& rule) {
  require_degree(kernel, rule);
  return rule.expectation([&](double r) {
    const double v = r * kernel(r);
    return v * v;
  });
}

/// E[r^j K(r)] for an arbitrary power; used for residual-bias predictions.
inline double kernel_moment(const kernel_spec& kernel, int power, const quadrature_rule& rule) {
  if (rule.exact_degree < power + kernel.order)
    throw insufficient_quadrature("quadrature rule too coarse for requested moment");
  return rule.expectation([&](double r) { return std::pow(r, power) * kernel(r); });
}

}  // namespace kerzoo
