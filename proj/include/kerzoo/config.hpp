#pragma once

// Experiment configuration: a flat text file of `dotted.key = value` lines.
// Blank lines and lines starting with '#' are ignored; unknown or repeated
// keys are errors. to_text() emits every key, so an echoed config re-runs
// the experiment exactly.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kerzoo/legendre_kernel.hpp"
#include "kerzoo/optimizers.hpp"
#include "kerzoo/perturbation.hpp"
#include "kerzoo/vector_ops.hpp"
#include "kerzoo/zo_estimators.hpp"

namespace kerzoo {

class config_error : public std::runtime_error {
 public:
  config_error(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct objective_spec {
  std::string kind = "quadratic";  // quadratic | odd_poly | rosenbrock | logistic | mlp
  std::size_t dim = 20;            // parameters (quadratic, odd_poly, rosenbrock) or features
  double condition_number = 1000.0;
  std::uint64_t seed = 1;
  dvec c1{1.0}, c3{0.0}, c5{0.0};  // odd_poly; a single value is broadcast
  std::size_t samples = 512;
  std::size_t batch_size = 64;
  double separation = 2.0;
  std::size_t hidden = 8;
  std::size_t classes = 2;
};

struct init_spec {
  std::string kind = "gaussian";  // gaussian | constant
  double scale = 1.0;             // gaussian standard deviation
  double value = 0.0;             // constant fill
  std::uint64_t seed = 1;
};

struct run_spec {
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  std::optional<double> target_loss;
  std::optional<double> gap_fraction;  // threshold L* + f (L0 - L*)
  bool stop_at_target = false;
  bool record_timing = false;
  bool record_iterate_loss = false;
  std::string output_dir = "kerzoo-out";
};

struct experiment_config {
  objective_spec objective;
  init_spec init;
  optimizer_kind optimizer = optimizer_kind::kerzoo;
  double eta = 1e-3;
  std::size_t steps = 1000;
  std::string radius = "inf";  // inf | auto (10 |theta_0|) | number
  eval_point point = eval_point::iterate;
  beta_rule beta = beta_rule::accelerated;
  lr_schedule lr = lr_schedule::constant;
  estimator_config estimator;
  int kernel_order = 3;
  double kernel_constant = 4.0;
  r_schedule::rule_kind schedule_rule = r_schedule::rule_kind::harmonic;
  double schedule_gamma = 0.999;
  std::optional<double> schedule_harmonic_steps;  // empty: steps / 2
  double schedule_min_halfwidth = 0.25;
  run_spec run;
  dvec eta_grid;  // learning rates tried by `tune`
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // prefer the shortest representation that round-trips
  for (int prec = 1; prec <= 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

inline double parse_double(const std::string& key, const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || std::isnan(v))
    throw config_error(key, "expected a number, got '" + text + "'");
  return v;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    throw config_error(key, "expected a non-negative integer, got '" + text + "'");
  errno = 0;
  const auto v = std::strtoull(text.c_str(), nullptr, 10);
  if (errno == ERANGE) throw config_error(key, "integer out of range");
  return v;
}

inline int parse_int(const std::string& key, const std::string& text) {
  const bool neg = !text.empty() && text[0] == '-';
  const auto mag = parse_uint(key, neg ? text.substr(1) : text);
  if (mag > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
    throw config_error(key, "integer out of range");
  return neg ? -static_cast<int>(mag) : static_cast<int>(mag);
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw config_error(key, "expected true or false, got '" + text + "'");
}

inline std::optional<double> parse_optional(const std::string& key, const std::string& text) {
  if (text == "none") return std::nullopt;
  return parse_double(key, text);
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : "none";
}

inline dvec parse_list(const std::string& key, const std::string& text) {
  dvec out;
  if (text == "none" || text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

inline std::string format_list(const dvec& v) {
  if (v.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

template <class E>
struct enum_names {
  std::vector<std::pair<E, std::string>> names;

  E parse(const std::string& key, const std::string& text) const {
    for (const auto& [e, n] : names)
      if (n == text) return e;
    std::string allowed;
    for (const auto& [e, n] : names) allowed += (allowed.empty() ? "" : " | ") + n;
    throw config_error(key, "expected one of " + allowed + ", got '" + text + "'");
  }
  std::string format(E e) const {
    for (const auto& [v, n] : names)
      if (v == e) return n;
    return "?";
  }
};

inline const enum_names<optimizer_kind> optimizer_names{
    {{optimizer_kind::kerzoo, "kerzoo"}, {optimizer_kind::zo_sgd, "zo_sgd"}}};
inline const enum_names<eval_point> eval_point_names{
    {{eval_point::iterate, "iterate"}, {eval_point::midpoint, "midpoint"}}};
inline const enum_names<beta_rule> beta_names{
    {{beta_rule::accelerated, "accelerated"}, {beta_rule::unit, "unit"}}};
inline const enum_names<lr_schedule> lr_names{
    {{lr_schedule::constant, "constant"}, {lr_schedule::linear, "linear"}}};
inline const enum_names<scale_mode> scale_names{
    {{scale_mode::raw, "raw"}, {scale_mode::unbiased, "unbiased"}}};
inline const enum_names<direction_mode> direction_names{
    {{direction_mode::unit_sphere, "unit_sphere"}, {direction_mode::raw_gaussian, "raw_gaussian"}}};
inline const enum_names<r_schedule::rule_kind> schedule_names{
    {{r_schedule::rule_kind::constant, "constant"},
     {r_schedule::rule_kind::geometric, "geometric"},
     {r_schedule::rule_kind::harmonic, "harmonic"}}};

struct key_binding {
  std::function<void(experiment_config&, const std::string&, const std::string&)> set;
  std::function<std::string(const experiment_config&)> get;
};

#define KERZOO_BIND(FIELD, PARSE, FORMAT)                                                      \
  key_binding {                                                                                \
    [](experiment_config& c, [[maybe_unused]] const std::string& k, const std::string& v) { c.FIELD = PARSE; }, \
        [](const experiment_config& c) { return FORMAT; }                                      \
  }

// Ordered by key so emitted files are stable.
inline const std::map<std::string, key_binding>& bindings() {
  static const std::map<std::string, key_binding> table = {
      {"objective.kind", KERZOO_BIND(objective.kind, v, c.objective.kind)},
      {"objective.dim", KERZOO_BIND(objective.dim, parse_uint(k, v), std::to_string(c.objective.dim))},
      {"objective.condition_number",
       KERZOO_BIND(objective.condition_number, parse_double(k, v),
                   format_double(c.objective.condition_number))},
      {"objective.seed", KERZOO_BIND(objective.seed, parse_uint(k, v), std::to_string(c.objective.seed))},
      {"objective.c1", KERZOO_BIND(objective.c1, parse_list(k, v), format_list(c.objective.c1))},
      {"objective.c3", KERZOO_BIND(objective.c3, parse_list(k, v), format_list(c.objective.c3))},
      {"objective.c5", KERZOO_BIND(objective.c5, parse_list(k, v), format_list(c.objective.c5))},
      {"objective.samples",
       KERZOO_BIND(objective.samples, parse_uint(k, v), std::to_string(c.objective.samples))},
      {"objective.batch_size",
       KERZOO_BIND(objective.batch_size, parse_uint(k, v), std::to_string(c.objective.batch_size))},
      {"objective.separation",
       KERZOO_BIND(objective.separation, parse_double(k, v), format_double(c.objective.separation))},
      {"objective.hidden",
       KERZOO_BIND(objective.hidden, parse_uint(k, v), std::to_string(c.objective.hidden))},
      {"objective.classes",
       KERZOO_BIND(objective.classes, parse_uint(k, v), std::to_string(c.objective.classes))},
      {"init.kind", KERZOO_BIND(init.kind, v, c.init.kind)},
      {"init.scale", KERZOO_BIND(init.scale, parse_double(k, v), format_double(c.init.scale))},
      {"init.value", KERZOO_BIND(init.value, parse_double(k, v), format_double(c.init.value))},
      {"init.seed", KERZOO_BIND(init.seed, parse_uint(k, v), std::to_string(c.init.seed))},
      {"optimizer.kind",
       KERZOO_BIND(optimizer, optimizer_names.parse(k, v), optimizer_names.format(c.optimizer))},
      {"optimizer.eta", KERZOO_BIND(eta, parse_double(k, v), format_double(c.eta))},
      {"optimizer.steps", KERZOO_BIND(steps, parse_uint(k, v), std::to_string(c.steps))},
      {"optimizer.radius", KERZOO_BIND(radius, v, c.radius)},
      {"optimizer.eval_point",
       KERZOO_BIND(point, eval_point_names.parse(k, v), eval_point_names.format(c.point))},
      {"optimizer.beta_rule", KERZOO_BIND(beta, beta_names.parse(k, v), beta_names.format(c.beta))},
      {"optimizer.lr_schedule", KERZOO_BIND(lr, lr_names.parse(k, v), lr_names.format(c.lr))},
      {"estimator.n", KERZOO_BIND(estimator.n, parse_uint(k, v), std::to_string(c.estimator.n))},
      {"estimator.epsilon",
       KERZOO_BIND(estimator.epsilon, parse_double(k, v), format_double(c.estimator.epsilon))},
      {"estimator.scale_mode", KERZOO_BIND(estimator.scale, scale_names.parse(k, v),
                                           scale_names.format(c.estimator.scale))},
      {"estimator.direction", KERZOO_BIND(estimator.direction, direction_names.parse(k, v),
                                          direction_names.format(c.estimator.direction))},
      {"estimator.antithetic", KERZOO_BIND(estimator.antithetic, parse_bool(k, v),
                                           std::string(c.estimator.antithetic ? "true" : "false"))},
      {"estimator.fixed_r",
       KERZOO_BIND(estimator.fixed_r, parse_optional(k, v), format_optional(c.estimator.fixed_r))},
      {"kernel.order", KERZOO_BIND(kernel_order, parse_int(k, v), std::to_string(c.kernel_order))},
      {"kernel.constant",
       KERZOO_BIND(kernel_constant, parse_double(k, v), format_double(c.kernel_constant))},
      {"schedule.rule", KERZOO_BIND(schedule_rule, schedule_names.parse(k, v),
                                    schedule_names.format(c.schedule_rule))},
      {"schedule.gamma",
       KERZOO_BIND(schedule_gamma, parse_double(k, v), format_double(c.schedule_gamma))},
      {"schedule.harmonic_steps",
       KERZOO_BIND(schedule_harmonic_steps, v == "auto" ? std::nullopt : parse_optional(k, v),
                   c.schedule_harmonic_steps ? format_double(*c.schedule_harmonic_steps)
                                             : std::string("auto"))},
      {"schedule.min_halfwidth", KERZOO_BIND(schedule_min_halfwidth, parse_double(k, v),
                                             format_double(c.schedule_min_halfwidth))},
      {"run.seed", KERZOO_BIND(run.seed, parse_uint(k, v), std::to_string(c.run.seed))},
      {"run.repeats", KERZOO_BIND(run.repeats, parse_uint(k, v), std::to_string(c.run.repeats))},
      {"run.target_loss",
       KERZOO_BIND(run.target_loss, parse_optional(k, v), format_optional(c.run.target_loss))},
      {"run.gap_fraction",
       KERZOO_BIND(run.gap_fraction, parse_optional(k, v), format_optional(c.run.gap_fraction))},
      {"run.stop_at_target", KERZOO_BIND(run.stop_at_target, parse_bool(k, v),
                                         std::string(c.run.stop_at_target ? "true" : "false"))},
      {"run.record_timing", KERZOO_BIND(run.record_timing, parse_bool(k, v),
                                        std::string(c.run.record_timing ? "true" : "false"))},
      {"run.record_iterate_loss",
       KERZOO_BIND(run.record_iterate_loss, parse_bool(k, v),
                   std::string(c.run.record_iterate_loss ? "true" : "false"))},
      {"run.output_dir", KERZOO_BIND(run.output_dir, v, c.run.output_dir)},
      {"tune.eta_grid", KERZOO_BIND(eta_grid, parse_list(k, v), format_list(c.eta_grid))},
  };
  return table;
}

#undef KERZOO_BIND

}  // namespace config_detail

/// Checks cross-field constraints; errors name the offending key.
inline void validate(const experiment_config& c) {
  const auto& o = c.objective;
  static const std::set<std::string> kinds{"quadratic", "odd_poly", "rosenbrock", "logistic", "mlp"};
  if (!kinds.count(o.kind)) throw config_error("objective.kind", "unknown objective '" + o.kind + "'");
  if (o.dim == 0) throw config_error("objective.dim", "must be >= 1");
  if (o.kind == "rosenbrock" && o.dim < 2) throw config_error("objective.dim", "rosenbrock needs >= 2");
  if (o.kind == "quadratic" && !(o.condition_number >= 1.0))
    throw config_error("objective.condition_number", "must be >= 1");
  if (o.kind == "odd_poly") {
    for (const auto& [key, list] : {std::pair{"objective.c1", &o.c1}, std::pair{"objective.c3", &o.c3},
                                    std::pair{"objective.c5", &o.c5}})
      if (list->size() != 1 && list->size() != o.dim)
        throw config_error(key, "needs 1 or objective.dim values");
  }
  if (o.kind == "logistic" || o.kind == "mlp") {
    if (o.batch_size == 0 || o.batch_size > o.samples)
      throw config_error("objective.batch_size", "must lie in [1, objective.samples]");
    if (o.kind == "mlp" && o.classes < 2) throw config_error("objective.classes", "must be >= 2");
    if (o.kind == "mlp" && o.hidden == 0) throw config_error("objective.hidden", "must be >= 1");
    if (o.kind == "mlp" &&
        tiny_mlp::parameter_count(o.dim, o.hidden, o.classes) > tiny_mlp::max_parameters)
      throw config_error("objective.hidden", "network exceeds 10^4 parameters");
  }
  if (c.init.kind != "gaussian" && c.init.kind != "constant")
    throw config_error("init.kind", "expected gaussian | constant");
  if (!(c.eta > 0.0) || !std::isfinite(c.eta)) throw config_error("optimizer.eta", "must be positive");
  if (c.steps == 0) throw config_error("optimizer.steps", "must be >= 1");
  if (c.radius != "inf" && c.radius != "auto") {
    const double r = config_detail::parse_double("optimizer.radius", c.radius);
    if (!(r > 0.0)) throw config_error("optimizer.radius", "must be positive, inf or auto");
  }
  if (c.estimator.n == 0) throw config_error("estimator.n", "must be >= 1");
  if (!(c.estimator.epsilon > 0.0)) throw config_error("estimator.epsilon", "must be positive");
  if (c.estimator.fixed_r && !(std::abs(*c.estimator.fixed_r) <= 1.0))
    throw config_error("estimator.fixed_r", "must lie in [-1, 1]");
  if (c.kernel_order < 1 || c.kernel_order % 2 == 0)
    throw config_error("kernel.order", "kernel order must be odd and >= 1");
  if (!(c.kernel_constant > 0.0) || !std::isfinite(c.kernel_constant))
    throw config_error("kernel.constant", "must be positive");
  if (!(c.schedule_min_halfwidth > 0.0 && c.schedule_min_halfwidth <= 1.0))
    throw config_error("schedule.min_halfwidth", "must lie in (0, 1]");
  if (!(c.schedule_gamma > 0.0 && c.schedule_gamma <= 1.0))
    throw config_error("schedule.gamma", "must lie in (0, 1]");
  if (c.schedule_harmonic_steps && !(*c.schedule_harmonic_steps > 0.0))
    throw config_error("schedule.harmonic_steps", "must be positive or auto");
  if (c.run.repeats == 0) throw config_error("run.repeats", "must be >= 1");
  if (c.run.target_loss && c.run.gap_fraction)
    throw config_error("run.gap_fraction", "set at most one of run.target_loss and run.gap_fraction");
  if (c.run.gap_fraction) {
    if (!(*c.run.gap_fraction > 0.0 && *c.run.gap_fraction < 1.0))
      throw config_error("run.gap_fraction", "must lie in (0, 1)");
    if (o.kind != "quadratic" && o.kind != "rosenbrock")
      throw config_error("run.gap_fraction", "objective has no known optimum");
  }
  for (double e : c.eta_grid)
    if (!(e > 0.0)) throw config_error("tune.eta_grid", "learning rates must be positive");
}

inline experiment_config parse_config(std::string_view text) {
  experiment_config cfg;
  const auto& table = config_detail::bindings();
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string line = config_detail::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = config_detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = config_detail::trim(std::string_view(line).substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end()) throw config_error(key, "unknown key");
    if (!seen.insert(key).second) throw config_error(key, "key given more than once");
    it->second.set(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

/// Every key, sorted, one per line.
inline std::string to_text(const experiment_config& cfg) {
  std::string out;
  for (const auto& [key, binding] : config_detail::bindings())
    out += key + " = " + binding.get(cfg) + "\n";
  return out;
}

/// Sets one key from its textual value (used for command-line overrides).
inline void set_key(experiment_config& cfg, const std::string& key, const std::string& value) {
  const auto& table = config_detail::bindings();
  const auto it = table.find(key);
  if (it == table.end()) throw config_error(key, "unknown key");
  it->second.set(cfg, key, value);
}

inline std::string get_key(const experiment_config& cfg, const std::string& key) {
  const auto& table = config_detail::bindings();
  const auto it = table.find(key);
  if (it == table.end()) throw config_error(key, "unknown key");
  return it->second.get(cfg);
}

}  // namespace kerzoo
