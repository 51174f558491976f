#pragma once

// Deterministic measurement of estimator bias and variance.
//
// For d = 1 the expectation over r is taken by Gauss-Legendre quadrature and
// over u in {+1, -1} by symmetric averaging, so polynomial objectives give
// exact expectations. For d > 1 the expectation over u is Monte Carlo with a
// control variate: each sample subtracts d (u^T grad) u, whose mean is the
// true gradient, so what is averaged is O(epsilon^2) per sample rather than
// O(|grad|) and the bias stays measurable above the sampling noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kerzoo/legendre_kernel.hpp"
#include "kerzoo/objectives.hpp"
#include "kerzoo/perturbation.hpp"
#include "kerzoo/vector_ops.hpp"
#include "kerzoo/zo_estimators.hpp"

namespace kerzoo {

/// Which estimator is measured; an empty kernel means vanilla (r fixed to 1).
struct bias_method {
  std::optional<kernel_spec> kernel;

  static bias_method vanilla() { return {}; }
  static bias_method with_kernel(kernel_spec k) { return {std::move(k)}; }

  std::string id() const {
    return kernel ? "kernel(" + std::to_string(kernel->order) + ")" : "vanilla";
  }
  double constant() const noexcept { return kernel ? kernel->constant : 1.0; }
};

struct expected_estimate {
  double value = 0.0;
  double second_moment = 0.0;  // E[g^2]
  bool exact = false;          // false when the quadrature cannot be exact
};

/// E[g] for a one-dimensional objective, in the requested scale mode.
template <gradient_objective O>
expected_estimate expected_estimate_1d(const O& objective, double theta, double epsilon,
                                       const bias_method& method, const quadrature_rule& rule,
                                       scale_mode scale = scale_mode::unbiased) {
  if (objective.dim() != 1) throw std::invalid_argument("expected_estimate_1d: objective must be 1-d");
  if (!(epsilon > 0.0)) throw std::invalid_argument("expected_estimate_1d: epsilon must be positive");
  if (method.kernel) require_moment_checked(*method.kernel);

  const auto quotient = [&](double step) {
    const double plus_point[1] = {theta + step};
    const double minus_point[1] = {theta - step};
    return (objective.eval(plus_point, 0) - objective.eval(minus_point, 0)) / (2.0 * epsilon);
  };
  // Per-draw estimate for direction u and scalar r, in raw scale.
  const auto sample = [&](double u, double r) {
    if (!method.kernel) return quotient(epsilon * u) * u;
    return quotient(epsilon * r * u) * (*method.kernel)(r) * u;
  };

  const double factor = scale == scale_mode::unbiased ? 1.0 / method.constant() : 1.0;
  expected_estimate out;
  if (!method.kernel) {
    const double gp = sample(1.0, 1.0) * factor;
    const double gm = sample(-1.0, 1.0) * factor;
    out.value = 0.5 * (gp + gm);
    out.second_moment = 0.5 * (gp * gp + gm * gm);
    out.exact = true;
    return out;
  }
  out.value = rule.expectation(
      [&](double r) { return 0.5 * (sample(1.0, r) + sample(-1.0, r)) * factor; });
  out.second_moment = rule.expectation([&](double r) {
    const double gp = sample(1.0, r) * factor;
    const double gm = sample(-1.0, r) * factor;
    return 0.5 * (gp * gp + gm * gm);
  });
  const auto degree = known_polynomial_degree(objective);
  // the integrand in r is a polynomial of degree deg(L) + order
  out.exact = degree && *degree + method.kernel->order <= rule.exact_degree;
  return out;
}

struct bias_point {
  double epsilon = 0.0;
  double bias = 0.0;           // |E[g_unbiased] - grad|
  double standard_error = 0.0;
  double second_moment = 0.0;  // E[|g_unbiased|^2]
  bool exact = false;
};

struct bias_report {
  std::string method;
  std::vector<bias_point> points;
  std::optional<double> slope;  // empty when fewer than min_fit_points qualify
  double residual = 0.0;        // RMS residual of the log-log fit
  std::size_t fitted_points = 0;
  std::size_t samples = 0;      // Monte Carlo directions (0 on the exact path)
};

struct bias_sweep_options {
  const quadrature_rule* rule = nullptr;  // defaults to the 64-node rule
  std::size_t samples = 20000;            // Monte Carlo directions for d > 1
  std::uint64_t seed = 0;
  double noise_multiple = 10.0;  // fit only points with bias > multiple * stderr
  std::size_t min_fit_points = 4;
};

/// Rounding floor used as the standard error of the exact path.
inline double rounding_floor(double scale) noexcept {
  return 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(scale));
}

/// Least-squares slope of log(bias) against log(epsilon).
inline std::pair<double, double> fit_log_log(std::span<const bias_point> pts) {
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0;
  for (const auto& p : pts) {
    sx += std::log(p.epsilon);
    sy += std::log(p.bias);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    const double dx = std::log(p.epsilon) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(p.bias) - my);
  }
  const double slope = sxy / sxx;
  double rss = 0;
  for (const auto& p : pts) {
    const double e = std::log(p.bias) - (my + slope * (std::log(p.epsilon) - mx));
    rss += e * e;
  }
  return {slope, std::sqrt(rss / n)};
}

namespace detail {

inline void check_grid(std::span<const double> grid) {
  if (grid.size() < 4) throw std::invalid_argument("bias_sweep: epsilon grid needs >= 4 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw std::invalid_argument("bias_sweep: epsilon values must be positive");
    if (i > 0 && !(grid[i] < grid[i - 1]))
      throw std::invalid_argument("bias_sweep: epsilon grid must be strictly decreasing");
  }
}

inline void fit(bias_report& report, const bias_sweep_options& opt) {
  std::vector<bias_point> usable;
  for (const auto& p : report.points)
    if (p.bias > opt.noise_multiple * p.standard_error) usable.push_back(p);
  report.fitted_points = usable.size();
  if (usable.size() < opt.min_fit_points) return;
  const auto [slope, residual] = fit_log_log(usable);
  report.slope = slope;
  report.residual = residual;
}

}  // namespace detail

/// Bias of the unbiased-scale estimator over a decreasing epsilon grid.
template <gradient_objective O>
bias_report bias_sweep(const O& objective, std::span<const double> theta,
                       std::span<const double> epsilon_grid, const bias_method& method,
                       const bias_sweep_options& opt = {}) {
  detail::check_grid(epsilon_grid);
  require_same_size(theta.size(), objective.dim(), "bias_sweep theta");
  if (method.kernel) require_moment_checked(*method.kernel);
  const quadrature_rule& rule = opt.rule ? *opt.rule : default_rule();
  const std::size_t d = objective.dim();
  const dvec grad = objective.exact_grad(theta, 0);

  bias_report report;
  report.method = method.id();

  if (d == 1) {
    for (double eps : epsilon_grid) {
      const auto e = expected_estimate_1d(objective, theta[0], eps, method, rule);
      bias_point p;
      p.epsilon = eps;
      p.bias = std::abs(e.value - grad[0]);
      p.standard_error = rounding_floor(grad[0]);
      p.second_moment = e.second_moment;
      p.exact = e.exact;
      report.points.push_back(p);
    }
    detail::fit(report, opt);
    return report;
  }

  if (opt.samples < 2) throw std::invalid_argument("bias_sweep: need >= 2 Monte Carlo samples");
  report.samples = opt.samples;
  const double scale = static_cast<double>(d) / method.constant();
  // r-integrated weight for one direction: E_r[quotient(r) K(r)], or the
  // plain quotient for vanilla.
  dvec scratch(d);
  const auto directional = [&](const dvec& u, double eps) {
    const auto quotient = [&](double r) {
      for (std::size_t k = 0; k < d; ++k) scratch[k] = theta[k] + eps * r * u[k];
      const double plus = objective.eval(scratch, 0);
      for (std::size_t k = 0; k < d; ++k) scratch[k] = theta[k] - eps * r * u[k];
      const double minus = objective.eval(scratch, 0);
      return (plus - minus) / (2.0 * eps);
    };
    if (!method.kernel) return quotient(1.0);
    return rule.expectation([&](double r) { return quotient(r) * (*method.kernel)(r); });
  };

  for (double eps : epsilon_grid) {
    dvec mean(d, 0.0), m2(d, 0.0);
    double second = 0.0;
    for (std::size_t s = 0; s < opt.samples; ++s) {
      const auto p = draw(opt.seed, s, d, direction_mode::unit_sphere);
      const double w = directional(p.u, eps) * scale;
      const double lead = static_cast<double>(d) * dot(p.u, grad);
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double g = w * p.u[k];
        sq += g * g;
        // Welford update of the control-variated sample
        const double y = (w - lead) * p.u[k];
        const double delta = y - mean[k];
        mean[k] += delta / static_cast<double>(s + 1);
        m2[k] += delta * (y - mean[k]);
      }
      second += sq;
    }
    double se2 = 0.0;
    for (std::size_t k = 0; k < d; ++k)
      se2 += m2[k] / static_cast<double>(opt.samples - 1) / static_cast<double>(opt.samples);
    bias_point pt;
    pt.epsilon = eps;
    pt.bias = norm(mean);
    pt.standard_error = std::sqrt(se2);
    pt.second_moment = second / static_cast<double>(opt.samples);
    report.points.push_back(pt);
  }
  detail::fit(report, opt);
  return report;
}

struct variance_row {
  int order = 0;
  double constant = 0.0;
  std::uint64_t t = 0;
  double halfwidth = 1.0;
  double proxy = 0.0;         // E[(r K(r))^2] with K at the normalized r
  double scaled_proxy = 0.0;  // E[(a_t r K(r))^2]
};

/// Variance proxy of each kernel at each requested step of the schedule.
inline std::vector<variance_row> variance_sweep(std::span<const kernel_spec> kernels,
                                                const r_schedule& schedule,
                                                std::span<const std::uint64_t> steps,
                                                const quadrature_rule& rule = default_rule()) {
  validate(schedule);
  std::vector<variance_row> rows;
  for (const auto& k : kernels) {
    require_moment_checked(k);
    const double proxy = kernel_second_moment(k, rule);
    for (std::uint64_t t : steps) {
      variance_row row;
      row.order = k.order;
      row.constant = k.constant;
      row.t = t;
      row.halfwidth = halfwidth_at(schedule, t);
      row.proxy = proxy;
      row.scaled_proxy = row.halfwidth * row.halfwidth * proxy;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace kerzoo
