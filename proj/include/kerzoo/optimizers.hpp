#pragma once

// KerZOO (accelerated kernel-weighted ZO) and the ZO-SGD baseline as
// step-wise state machines. Steps work on copies and commit only on success,
// so a failing step leaves the previous state intact.
//
// KerZOO step t:
//   beta_t   = 1 + t/6
//   theta_md = theta / beta_t + (1 - 1/beta_t) theta_ag
//   g        = kernel estimate at theta (eval_point::iterate) or theta_md
//   theta'   = min(1, R / |theta - eta g|) (theta - eta g)
//   theta_ag = theta' / beta_t + (1 - 1/beta_t) theta_ag

#include <chrono>
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

enum class optimizer_kind { kerzoo, zo_sgd };
enum class eval_point { iterate, midpoint };
enum class beta_rule { accelerated, unit };  // unit pins beta_t = 1
enum class lr_schedule { constant, linear };

struct estimator_config {
  double epsilon = 1e-3;
  std::size_t n = 3;
  direction_mode direction = direction_mode::unit_sphere;
  scale_mode scale = scale_mode::raw;
  bool antithetic = false;
  std::optional<double> fixed_r;  // overrides r_raw of every draw when set
};

struct optimizer_config {
  optimizer_kind kind = optimizer_kind::kerzoo;
  double eta = 1e-3;
  std::size_t steps = 1000;
  double radius = std::numeric_limits<double>::infinity();
  eval_point point = eval_point::iterate;
  beta_rule beta = beta_rule::accelerated;
  lr_schedule lr = lr_schedule::constant;
  estimator_config estimator;
  kernel_spec kernel = construct_kernel(3, 4.0);
  r_schedule shrink = r_schedule::harmonic(500, 0.25);
  std::uint64_t seed = 0;
  bool record_iterate_loss = false;

  std::size_t evals_per_step() const noexcept {
    const std::size_t per = kind == optimizer_kind::kerzoo && estimator.antithetic ? 4 : 2;
    return per * estimator.n;
  }
};

inline void validate(const optimizer_config& c) {
  if (!(c.eta > 0.0) || !std::isfinite(c.eta)) throw std::invalid_argument("eta must be positive");
  if (c.steps == 0) throw std::invalid_argument("steps must be >= 1");
  if (!(c.radius > 0.0)) throw std::invalid_argument("radius must be positive (or infinite)");
  if (c.estimator.n == 0) throw std::invalid_argument("estimator n must be >= 1");
  if (!(c.estimator.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (c.estimator.fixed_r && !(std::abs(*c.estimator.fixed_r) <= 1.0))
    throw std::invalid_argument("fixed_r must lie in [-1, 1]");
  validate(c.shrink);
  if (c.kind == optimizer_kind::kerzoo) require_moment_checked(c.kernel);
}

struct optimizer_state {
  dvec theta;
  dvec theta_ag;
  std::uint64_t t = 0;
  std::uint64_t evals = 0;

  static optimizer_state start(dvec theta0) {
    optimizer_state s;
    s.theta_ag = theta0;
    s.theta = std::move(theta0);
    return s;
  }
};

struct trace_record {
  std::uint64_t t = 0;          // index of the step just taken
  double loss = 0.0;            // full loss at the returned iterate after the step
  std::optional<double> loss_iterate;
  double grad_norm = 0.0;
  double step_size = 0.0;       // eta_t
  double halfwidth = 1.0;       // a_t
  double beta = 1.0;
  bool clipped = false;
  std::uint64_t eval_count = 0; // cumulative
  std::uint64_t seed = 0;
  std::uint64_t index_begin = 0;
  std::uint64_t index_end = 0;  // one past the last perturbation index
  double wall_seconds = 0.0;
};

class non_finite_iterate : public std::runtime_error {
 public:
  explicit non_finite_iterate(std::uint64_t t)
      : std::runtime_error("non-finite iterate at step " + std::to_string(t)), t_(t) {}
  std::uint64_t step() const noexcept { return t_; }

 private:
  std::uint64_t t_;
};

inline double beta_at(beta_rule rule, std::uint64_t t) noexcept {
  return rule == beta_rule::accelerated ? 1.0 + static_cast<double>(t) / 6.0 : 1.0;
}

inline double learning_rate_at(const optimizer_config& c, std::uint64_t t) noexcept {
  if (c.lr == lr_schedule::linear)
    return c.eta * (1.0 - static_cast<double>(t) / static_cast<double>(c.steps));
  return c.eta;
}

/// Perturbations for step t: indices t*n .. t*n + n - 1 under the run seed.
inline std::vector<perturbation_draw> step_draws(const optimizer_config& c, std::uint64_t t,
                                                 std::size_t d, double halfwidth) {
  std::vector<perturbation_draw> draws;
  draws.reserve(c.estimator.n);
  for (std::size_t i = 0; i < c.estimator.n; ++i) {
    auto p = draw(c.seed, t * c.estimator.n + i, d, c.estimator.direction, halfwidth);
    if (c.estimator.fixed_r) p.r_raw = *c.estimator.fixed_r;
    draws.push_back(std::move(p));
  }
  return draws;
}

namespace detail {

// Origin-centred projection onto the ball of radius R; returns whether it moved.
inline bool clip_to_ball(dvec& v, double radius) {
  if (!std::isfinite(radius)) return false;
  const double n = norm(v);
  if (n <= radius) return false;
  const double s = radius / n;
  for (double& x : v) x *= s;
  return true;
}

template <forward_objective O>
trace_record make_record(const O& objective, const optimizer_state& next, std::uint64_t t,
                         const optimizer_config& c, double grad_norm, double eta_t, double a_t,
                         double beta, bool clipped,
                         std::chrono::steady_clock::time_point started) {
  trace_record rec;
  rec.t = t;
  rec.loss = full_loss(objective, c.kind == optimizer_kind::kerzoo ? next.theta_ag : next.theta);
  if (c.record_iterate_loss) rec.loss_iterate = full_loss(objective, next.theta);
  rec.grad_norm = grad_norm;
  rec.step_size = eta_t;
  rec.halfwidth = a_t;
  rec.beta = beta;
  rec.clipped = clipped;
  rec.eval_count = next.evals;
  rec.seed = c.seed;
  rec.index_begin = t * c.estimator.n;
  rec.index_end = rec.index_begin + c.estimator.n;
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

}  // namespace detail

/// One KerZOO iteration; only forward evaluations of `objective` are used.
template <forward_objective O>
trace_record kerzoo_step(optimizer_state& state, const O& objective, std::size_t batch,
                         const optimizer_config& c) {
  const auto started = std::chrono::steady_clock::now();
  const forward_only<O> oracle(objective);
  const std::size_t d = oracle.dim();
  require_same_size(state.theta.size(), d, "kerzoo_step");
  const std::uint64_t t = state.t;
  const double beta = beta_at(c.beta, t);
  const double inv = 1.0 / beta;

  dvec midpoint(d);
  for (std::size_t k = 0; k < d; ++k)
    midpoint[k] = inv * state.theta[k] + (1.0 - inv) * state.theta_ag[k];
  const dvec& at = c.point == eval_point::iterate ? state.theta : midpoint;

  const double a_t = halfwidth_at(c.shrink, t);
  const auto draws = step_draws(c, t, d, a_t);
  const auto est = c.estimator.antithetic
                       ? antithetic_kernel_estimate(oracle, at, batch, c.estimator.epsilon,
                                                    c.kernel, draws, c.estimator.scale)
                       : kernel_estimate(oracle, at, batch, c.estimator.epsilon, c.kernel, draws,
                                         c.estimator.scale);

  const double eta_t = learning_rate_at(c, t);
  optimizer_state next;
  next.theta.resize(d);
  for (std::size_t k = 0; k < d; ++k) next.theta[k] = state.theta[k] - eta_t * est.g[k];
  const bool clipped = detail::clip_to_ball(next.theta, c.radius);
  if (inv == 1.0) {
    next.theta_ag = next.theta;
  } else {
    next.theta_ag.resize(d);
    for (std::size_t k = 0; k < d; ++k)
      next.theta_ag[k] = inv * next.theta[k] + (1.0 - inv) * state.theta_ag[k];
  }
  if (!all_finite(next.theta) || !all_finite(next.theta_ag)) throw non_finite_iterate(t);
  next.t = t + 1;
  next.evals = state.evals + est.eval_count;

  auto rec = detail::make_record(oracle, next, t, c, norm(est.g), eta_t, a_t, beta, clipped,
                                 started);
  state = std::move(next);
  return rec;
}

/// One ZO-SGD iteration: theta' = theta - eta * vanilla estimate.
template <forward_objective O>
trace_record zo_sgd_step(optimizer_state& state, const O& objective, std::size_t batch,
                         const optimizer_config& c) {
  const auto started = std::chrono::steady_clock::now();
  const forward_only<O> oracle(objective);
  const std::size_t d = oracle.dim();
  require_same_size(state.theta.size(), d, "zo_sgd_step");
  const std::uint64_t t = state.t;
  const auto draws = step_draws(c, t, d, 1.0);
  const auto est =
      vanilla_estimate(oracle, state.theta, batch, c.estimator.epsilon, draws, c.estimator.scale);

  const double eta_t = learning_rate_at(c, t);
  optimizer_state next;
  next.theta.resize(d);
  for (std::size_t k = 0; k < d; ++k) next.theta[k] = state.theta[k] - eta_t * est.g[k];
  const bool clipped = detail::clip_to_ball(next.theta, c.radius);
  if (!all_finite(next.theta)) throw non_finite_iterate(t);
  next.theta_ag = next.theta;
  next.t = t + 1;
  next.evals = state.evals + est.eval_count;

  auto rec =
      detail::make_record(oracle, next, t, c, norm(est.g), eta_t, 1.0, 1.0, clipped, started);
  state = std::move(next);
  return rec;
}

template <forward_objective O>
trace_record step(optimizer_state& state, const O& objective, std::size_t batch,
                  const optimizer_config& c) {
  return c.kind == optimizer_kind::kerzoo ? kerzoo_step(state, objective, batch, c)
                                          : zo_sgd_step(state, objective, batch, c);
}

struct stop_rule {
  std::optional<double> target_loss;  // threshold on the recorded loss
  bool stop_at_target = false;        // end the run at the first hit
};

struct run_failure {
  std::uint64_t step = 0;
  std::string message;
};

struct run_result {
  dvec solution;  // theta_N^ag for KerZOO, theta_N for ZO-SGD
  optimizer_state final_state;
  std::vector<trace_record> trace;
  double initial_loss = 0.0;
  std::optional<std::uint64_t> iterations_to_target;  // steps taken at first hit
  std::optional<run_failure> failure;

  bool ok() const noexcept { return !failure.has_value(); }
};

/// Runs up to c.steps iterations; step t uses batch t mod batch_count. Step
/// errors end the run and are reported in `failure` with the last valid state
/// and the partial trace kept.
template <forward_objective O>
run_result run(const O& objective, dvec theta0, const optimizer_config& c,
               const stop_rule& stop = {}) {
  validate(c);
  require_same_size(theta0.size(), objective.dim(), "run theta0");
  run_result out;
  out.initial_loss = full_loss(forward_only<O>(objective), theta0);
  auto state = optimizer_state::start(std::move(theta0));
  out.trace.reserve(c.steps);
  for (std::size_t i = 0; i < c.steps; ++i) {
    const std::size_t batch = static_cast<std::size_t>(state.t % objective.batch_count());
    try {
      out.trace.push_back(step(state, objective, batch, c));
    } catch (const std::exception& e) {
      out.failure = run_failure{state.t, e.what()};
      break;
    }
    if (stop.target_loss && !out.iterations_to_target && out.trace.back().loss <= *stop.target_loss) {
      out.iterations_to_target = state.t;
      if (stop.stop_at_target) break;
    }
  }
  out.solution = c.kind == optimizer_kind::kerzoo ? state.theta_ag : state.theta;
  out.final_state = std::move(state);
  return out;
}

}  // namespace kerzoo
