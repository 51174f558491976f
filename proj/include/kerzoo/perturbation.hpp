#pragma once

// Random directions u and scalars r for the two-point estimators, regenerable
// from (seed, index), plus the shrinking-r schedule.
//
// The kernel always sees the normalized scalar r_raw in [-1, 1]. Shrinkage
// only multiplies the physical step (epsilon * a_t * r_raw), so the kernel's
// moment identities hold at every step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kerzoo/random.hpp"
#include "kerzoo/vector_ops.hpp"

namespace kerzoo {

enum class direction_mode {
  unit_sphere,   // u = v / |v|, v ~ N(0, I)
  raw_gaussian,  // u ~ N(0, I)
};

struct r_schedule {
  enum class rule_kind { constant, geometric, harmonic };

  rule_kind rule = rule_kind::harmonic;
  double gamma = 0.999;          // geometric decay factor
  double harmonic_steps = 500;   // T_s
  double min_halfwidth = 0.25;   // a_min

  static r_schedule constant() { return {rule_kind::constant, 0.999, 500, 1.0}; }
  static r_schedule geometric(double gamma, double min_halfwidth) {
    return {rule_kind::geometric, gamma, 500, min_halfwidth};
  }
  static r_schedule harmonic(double steps, double min_halfwidth) {
    return {rule_kind::harmonic, 0.999, steps, min_halfwidth};
  }
};

inline void validate(const r_schedule& s) {
  if (!(s.min_halfwidth > 0.0 && s.min_halfwidth <= 1.0))
    throw std::invalid_argument("schedule min_halfwidth must lie in (0, 1]");
  if (s.rule == r_schedule::rule_kind::geometric && !(s.gamma > 0.0 && s.gamma <= 1.0))
    throw std::invalid_argument("geometric schedule needs gamma in (0, 1]");
  if (s.rule == r_schedule::rule_kind::harmonic && !(s.harmonic_steps > 0.0))
    throw std::invalid_argument("harmonic schedule needs positive harmonic_steps");
}

/// Half-width a_t of the r range at step t; a_0 = 1 for every rule.
inline double halfwidth_at(const r_schedule& s, std::uint64_t t) {
  if (t == 0) return 1.0;
  switch (s.rule) {
    case r_schedule::rule_kind::constant:
      return 1.0;
    case r_schedule::rule_kind::geometric:
      return std::max(s.min_halfwidth, std::pow(s.gamma, static_cast<double>(t)));
    case r_schedule::rule_kind::harmonic:
      return std::max(s.min_halfwidth, 1.0 / (1.0 + static_cast<double>(t) / s.harmonic_steps));
  }
  return 1.0;
}

struct perturbation_draw {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::size_t dim = 0;
  direction_mode mode = direction_mode::unit_sphere;
  dvec u;
  double r_raw = 0.0;
  double halfwidth = 1.0;

  /// The scalar actually applied to the parameters.
  double effective_r() const noexcept { return halfwidth * r_raw; }
};

/// Pure function of (seed, index, d, mode). u uses the direction stream of
/// the index; r_raw uses the scalar stream, so the two are independent.
inline perturbation_draw draw(std::uint64_t seed, std::uint64_t index, std::size_t d,
                              direction_mode mode, double halfwidth = 1.0) {
  if (d == 0) throw std::invalid_argument("draw: dimension must be >= 1");
  perturbation_draw out;
  out.seed = seed;
  out.index = index;
  out.dim = d;
  out.mode = mode;
  out.halfwidth = halfwidth;
  out.u.resize(d);
  fill_gaussian(counter_stream(seed, index, stream::direction), out.u);
  if (mode == direction_mode::unit_sphere) {
    const double n = norm(out.u);
    for (double& v : out.u) v /= n;
  }
  const auto words = counter_stream(seed, index, stream::scalar).block(0);
  out.r_raw = 2.0 * to_unit_interval(words[0]) - 1.0;
  return out;
}

/// The antithetic partner (u, -r_raw) of a draw.
inline perturbation_draw antithetic(perturbation_draw p) {
  p.r_raw = -p.r_raw;
  return p;
}

/// theta + sign * epsilon * a_t * r_raw * u, leaving theta untouched.
inline dvec apply(const perturbation_draw& p, std::span<const double> theta, double epsilon,
                  int sign) {
  require_same_size(p.u.size(), theta.size(), "apply");
  if (!(epsilon > 0.0)) throw std::invalid_argument("apply: epsilon must be positive");
  const double step = (sign < 0 ? -1.0 : 1.0) * (epsilon * p.effective_r());
  dvec out(theta.begin(), theta.end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += step * p.u[k];
  return out;
}

/// In-place perturbation with an exact undo. Adding and then subtracting the
/// same increment round-trips for almost every coordinate; the few that do
/// not (binade crossings, |theta_k| << |increment|) are recorded at apply time
/// and patched on restore, so restoration is bit-exact while the side storage
/// stays proportional to the number of such coordinates.
class in_place_perturbation {
 public:
  in_place_perturbation(std::span<double> theta, const perturbation_draw& p, double epsilon,
                        int sign)
      : theta_(theta), draw_(&p) {
    require_same_size(p.u.size(), theta.size(), "in_place_perturbation");
    if (!(epsilon > 0.0)) throw std::invalid_argument("in_place_perturbation: epsilon must be positive");
    step_ = (sign < 0 ? -1.0 : 1.0) * (epsilon * p.effective_r());
    for (std::size_t k = 0; k < theta_.size(); ++k) {
      const double original = theta_[k];
      const double moved = original + step_ * p.u[k];
      if (moved - step_ * p.u[k] != original) exceptions_.emplace_back(k, original);
      theta_[k] = moved;
    }
  }

  in_place_perturbation(const in_place_perturbation&) = delete;
  in_place_perturbation& operator=(const in_place_perturbation&) = delete;

  ~in_place_perturbation() { restore(); }

  void restore() noexcept {
    if (restored_) return;
    for (std::size_t k = 0; k < theta_.size(); ++k) theta_[k] -= step_ * draw_->u[k];
    for (const auto& [k, v] : exceptions_) theta_[k] = v;
    restored_ = true;
  }

  std::size_t patched_coordinates() const noexcept { return exceptions_.size(); }

 private:
  std::span<double> theta_;
  const perturbation_draw* draw_;
  double step_ = 0.0;
  std::vector<std::pair<std::size_t, double>> exceptions_;
  bool restored_ = false;
};

}  // namespace kerzoo
