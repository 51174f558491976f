#pragma once

// Reference computations for the tests, written independently of the
// library: no quadrature, no kernel construction, no optimizer code.

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <functional>
#include <vector>

namespace oracle {

using vec = std::vector<double>;

/// Exact integral of r^k over [-1, 1] divided by 2 (the uniform mean).
inline double uniform_monomial_mean(int k) { return k % 2 ? 0.0 : 1.0 / (k + 1); }

/// E[r^j K(r)] for K given by odd monomial coefficients a_0 r + a_1 r^3 + ...
inline double kernel_moment(const vec& odd_coeffs, int j) {
  double s = 0.0;
  for (std::size_t i = 0; i < odd_coeffs.size(); ++i)
    s += odd_coeffs[i] * uniform_monomial_mean(j + 2 * static_cast<int>(i) + 1);
  return s;
}

/// E[(r K(r))^2], expanded term by term.
inline double kernel_second_moment(const vec& odd_coeffs) {
  double s = 0.0;
  for (std::size_t a = 0; a < odd_coeffs.size(); ++a)
    for (std::size_t b = 0; b < odd_coeffs.size(); ++b)
      s += odd_coeffs[a] * odd_coeffs[b] *
           uniform_monomial_mean(4 + 2 * static_cast<int>(a + b));
  return s;
}

/// Printed closed forms of the first kernels, coefficients of r, r^3, ...
inline vec closed_form_kernel(int order, double c) {
  switch (order) {
    case 1: return {3.0 * c};
    case 3: return {75.0 * c / 4.0, -105.0 * c / 4.0};
    case 5: return {105.0 * c * 35.0 / 64.0, -105.0 * c * 126.0 / 64.0, 105.0 * c * 99.0 / 64.0};
    case 7:
      return {315.0 * c * 105.0 / 256.0, -315.0 * c * 693.0 / 256.0, 315.0 * c * 1287.0 / 256.0,
              -315.0 * c * 715.0 / 256.0};
    default: return {};
  }
}

/// Per-coordinate central difference with step h (1 + |x_k|).
inline vec central_difference(const std::function<double(const vec&)>& f, vec x, double h = 1e-6) {
  vec g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double xk = x[k];
    const double step = h * (1.0 + std::abs(xk));
    x[k] = xk + step;
    const double plus = f(x);
    x[k] = xk - step;
    const double minus = f(x);
    x[k] = xk;
    g[k] = (plus - minus) / (2.0 * step);
  }
  return g;
}

/// Scalar reference of the accelerated update for d = 1, given the
/// per-step gradient estimates the optimizer used.
struct scalar_accelerated {
  double theta;
  double theta_ag;

  void step(double t, double eta, double g) {
    const double beta = 1.0 + t / 6.0;
    theta = theta - eta * g;
    theta_ag = theta / beta + (1.0 - 1.0 / beta) * theta_ag;
  }
};

}  // namespace oracle

namespace oracle {

/// max_k |a_k - b_k| relative to the larger infinity norm of the two.
inline double max_relative_error(const vec& a, const vec& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff = std::max(diff, std::abs(a[k] - b[k]));
    scale = std::max({scale, std::abs(a[k]), std::abs(b[k])});
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace oracle
