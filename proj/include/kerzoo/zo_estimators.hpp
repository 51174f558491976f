#pragma once

// Two-point zeroth-order gradient estimators built from forward evaluations:
//
//   vanilla:  g = 1/n sum_i [L(x + eps u_i) - L(x - eps u_i)] / (2 eps) * u_i
//   kernel:   g = 1/n sum_i [L(x + eps a r_i u_i) - L(x - eps a r_i u_i)] / (2 eps) * K(r_i) * u_i
//
// In expectation the kernel estimator is (C/d) grad L plus a residual whose
// leading epsilon^2 term is removed by the third-moment condition on K.
// scale_mode::unbiased multiplies by d/C (unit-sphere directions) to undo
// that factor.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kerzoo/legendre_kernel.hpp"
#include "kerzoo/objectives.hpp"
#include "kerzoo/perturbation.hpp"
#include "kerzoo/vector_ops.hpp"

namespace kerzoo {

enum class scale_mode { raw, unbiased };

struct kernel_id {
  int order = 0;
  double constant = 0.0;
  bool operator==(const kernel_id&) const = default;
};

struct gradient_estimate {
  dvec g;
  double epsilon = 0.0;
  std::size_t n = 0;
  std::optional<kernel_id> kernel;
  scale_mode scale = scale_mode::raw;
  std::size_t eval_count = 0;
  std::uint64_t seed = 0;
  std::uint64_t first_index = 0;
};

/// A forward evaluation returned NaN or infinity.
class non_finite_loss : public std::runtime_error {
 public:
  non_finite_loss(std::uint64_t perturbation_index, int sign)
      : std::runtime_error("non-finite loss at perturbation index " +
                           std::to_string(perturbation_index) + (sign > 0 ? " (+)" : " (-)")),
        index_(perturbation_index),
        sign_(sign) {}
  std::uint64_t perturbation_index() const noexcept { return index_; }
  int sign() const noexcept { return sign_; }

 private:
  std::uint64_t index_;
  int sign_;
};

class kernel_rejected : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws kernel_rejected unless the kernel passes its moment check on the
/// default 64-node rule.
inline void require_moment_checked(const kernel_spec& kernel) {
  validate_kernel_parameters(kernel.order, kernel.constant);
  if (kernel.mono_coeffs.size() != static_cast<std::size_t>((kernel.order + 1) / 2))
    throw kernel_rejected("kernel coefficient count does not match its order");
  if (!check_moments(kernel, default_rule()).all_pass())
    throw kernel_rejected("kernel fails its moment conditions (order " +
                          std::to_string(kernel.order) + ")");
}

/// Factor that maps the raw-mode estimate to an unbiased one: d/C for
/// unit-sphere directions (E[u u^T] = I/d), 1/C for raw Gaussian ones
/// (E[u u^T] = I).
inline double unbiased_factor(std::size_t d, direction_mode mode, double constant) {
  const double dir = mode == direction_mode::unit_sphere ? static_cast<double>(d) : 1.0;
  return dir / constant;
}

namespace detail {

template <forward_objective O>
double checked_eval(const O& o, std::span<const double> x, std::size_t batch, std::uint64_t index,
                    int sign) {
  const double v = o.eval(x, batch);
  if (!std::isfinite(v)) throw non_finite_loss(index, sign);
  return v;
}

/// [L(x + s u) - L(x - s u)] / (2 eps) with s = eps * a * r. Both sides use
/// the same batch; + is evaluated before -.
template <forward_objective O>
double pair_difference(const O& o, std::span<const double> theta, std::size_t batch,
                       double epsilon, const perturbation_draw& p, dvec& scratch) {
  const double step = epsilon * p.effective_r();
  for (std::size_t k = 0; k < scratch.size(); ++k) scratch[k] = theta[k] + step * p.u[k];
  const double plus = checked_eval(o, scratch, batch, p.index, +1);
  for (std::size_t k = 0; k < scratch.size(); ++k) scratch[k] = theta[k] - step * p.u[k];
  const double minus = checked_eval(o, scratch, batch, p.index, -1);
  return (plus - minus) / (2.0 * epsilon);
}

inline void check_inputs(std::size_t d, std::span<const double> theta, double epsilon,
                         std::span<const perturbation_draw> draws) {
  require_same_size(theta.size(), d, "estimator theta");
  if (!(epsilon > 0.0)) throw std::invalid_argument("estimator: epsilon must be positive");
  if (draws.empty()) throw std::invalid_argument("estimator: need at least one perturbation");
  for (const auto& p : draws) require_same_size(p.u.size(), d, "estimator direction");
}

inline void finish(gradient_estimate& est, std::size_t terms, scale_mode scale, double factor) {
  const double inv = 1.0 / static_cast<double>(terms);
  for (double& v : est.g) v *= inv;
  est.scale = scale;
  if (scale == scale_mode::unbiased)
    for (double& v : est.g) v *= factor;
}

}  // namespace detail

/// Averaged central-difference estimate along draws[i].u with r fixed to 1
/// (the draws' r_raw and halfwidth are ignored).
template <forward_objective O>
gradient_estimate vanilla_estimate(const O& objective, std::span<const double> theta,
                                   std::size_t batch, double epsilon,
                                   std::span<const perturbation_draw> draws,
                                   scale_mode scale = scale_mode::raw) {
  const std::size_t d = objective.dim();
  detail::check_inputs(d, theta, epsilon, draws);
  gradient_estimate est;
  est.g.assign(d, 0.0);
  est.epsilon = epsilon;
  est.n = draws.size();
  est.seed = draws.front().seed;
  est.first_index = draws.front().index;
  dvec scratch(d);
  for (const auto& p : draws) {
    perturbation_draw unit = p;
    unit.r_raw = 1.0;
    unit.halfwidth = 1.0;
    const double coef = detail::pair_difference(objective, theta, batch, epsilon, unit, scratch);
    for (std::size_t k = 0; k < d; ++k) est.g[k] += coef * p.u[k];
    est.eval_count += 2;
  }
  detail::finish(est, draws.size(), scale, unbiased_factor(d, draws.front().mode, 1.0));
  return est;
}

/// Kernel-weighted estimate. K is evaluated at the normalized r_raw of each
/// draw while the physical step uses halfwidth * r_raw.
template <forward_objective O>
gradient_estimate kernel_estimate(const O& objective, std::span<const double> theta,
                                  std::size_t batch, double epsilon, const kernel_spec& kernel,
                                  std::span<const perturbation_draw> draws,
                                  scale_mode scale = scale_mode::raw) {
  const std::size_t d = objective.dim();
  detail::check_inputs(d, theta, epsilon, draws);
  require_moment_checked(kernel);
  gradient_estimate est;
  est.g.assign(d, 0.0);
  est.epsilon = epsilon;
  est.n = draws.size();
  est.kernel = kernel_id{kernel.order, kernel.constant};
  est.seed = draws.front().seed;
  est.first_index = draws.front().index;
  dvec scratch(d);
  for (const auto& p : draws) {
    const double coef =
        detail::pair_difference(objective, theta, batch, epsilon, p, scratch) * kernel(p.r_raw);
    for (std::size_t k = 0; k < d; ++k) est.g[k] += coef * p.u[k];
    est.eval_count += 2;
  }
  detail::finish(est, draws.size(), scale, unbiased_factor(d, draws.front().mode, kernel.constant));
  return est;
}

/// Kernel estimate where each draw contributes both (u, r) and (u, -r);
/// 4 evaluations per draw.
template <forward_objective O>
gradient_estimate antithetic_kernel_estimate(const O& objective, std::span<const double> theta,
                                             std::size_t batch, double epsilon,
                                             const kernel_spec& kernel,
                                             std::span<const perturbation_draw> draws,
                                             scale_mode scale = scale_mode::raw) {
  const std::size_t d = objective.dim();
  detail::check_inputs(d, theta, epsilon, draws);
  require_moment_checked(kernel);
  gradient_estimate est;
  est.g.assign(d, 0.0);
  est.epsilon = epsilon;
  est.n = draws.size();
  est.kernel = kernel_id{kernel.order, kernel.constant};
  est.seed = draws.front().seed;
  est.first_index = draws.front().index;
  dvec scratch(d);
  for (const auto& p : draws) {
    const perturbation_draw mirrored = antithetic(p);
    const double coef_pos =
        detail::pair_difference(objective, theta, batch, epsilon, p, scratch) * kernel(p.r_raw);
    const double coef_neg = detail::pair_difference(objective, theta, batch, epsilon, mirrored,
                                                    scratch) *
                            kernel(mirrored.r_raw);
    const double coef = coef_pos + coef_neg;
    for (std::size_t k = 0; k < d; ++k) est.g[k] += coef * p.u[k];
    est.eval_count += 4;
  }
  detail::finish(est, 2 * draws.size(), scale,
                 unbiased_factor(d, draws.front().mode, kernel.constant));
  return est;
}

}  // namespace kerzoo
