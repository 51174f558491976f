#pragma once

// Config-driven experiment runner and its file formats.
//
// A run directory holds config.resolved (every key, re-runnable as is),
// trace_<i>.jsonl per repeat and summary.csv. Trace records are one JSON
// object per line: a header, one record per step, and an end record whose
// status is "ok" or "failed".

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kerzoo/bias_lab.hpp"
#include "kerzoo/config.hpp"
#include "kerzoo/legendre_kernel.hpp"
#include "kerzoo/objectives.hpp"
#include "kerzoo/optimizers.hpp"
#include "kerzoo/random.hpp"

namespace kerzoo {

inline constexpr int trace_schema_version = 1;

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

class harness_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- building

inline any_objective make_objective(const objective_spec& o) {
  if (o.kind == "quadratic") return quadratic(o.dim, o.condition_number, o.seed);
  if (o.kind == "rosenbrock") return rosenbrock(o.dim);
  if (o.kind == "logistic") return logistic_synth(o.dim, o.samples, o.batch_size, o.seed, o.separation);
  if (o.kind == "mlp")
    return tiny_mlp(o.dim, o.hidden, o.classes, o.seed, o.samples, o.batch_size, o.separation);
  if (o.kind == "odd_poly") {
    const auto widen = [&](const dvec& c) { return c.size() == 1 ? dvec(o.dim, c[0]) : c; };
    return odd_poly(widen(o.c1), widen(o.c3), widen(o.c5));
  }
  throw config_error("objective.kind", "unknown objective '" + o.kind + "'");
}

/// Starting point of repeat `repeat`; every optimizer sees the same one.
inline dvec initial_point(const init_spec& init, std::size_t d, std::uint64_t repeat) {
  dvec theta(d, init.value);
  if (init.kind == "gaussian") {
    fill_gaussian(counter_stream(init.seed, repeat, stream::init), theta);
    for (double& v : theta) v *= init.scale;
  }
  return theta;
}

inline double resolve_radius(const std::string& radius, std::span<const double> theta0) {
  if (radius == "inf") return std::numeric_limits<double>::infinity();
  if (radius == "auto") return 10.0 * norm(theta0);
  return config_detail::parse_double("optimizer.radius", radius);
}

inline optimizer_config make_optimizer_config(const experiment_config& cfg, std::uint64_t seed,
                                              std::span<const double> theta0) {
  optimizer_config c;
  c.kind = cfg.optimizer;
  c.eta = cfg.eta;
  c.steps = cfg.steps;
  c.radius = resolve_radius(cfg.radius, theta0);
  c.point = cfg.point;
  c.beta = cfg.beta;
  c.lr = cfg.lr;
  c.estimator = cfg.estimator;
  c.kernel = construct_kernel(cfg.kernel_order, cfg.kernel_constant);
  c.shrink.rule = cfg.schedule_rule;
  c.shrink.gamma = cfg.schedule_gamma;
  c.shrink.harmonic_steps = cfg.schedule_harmonic_steps
                                ? *cfg.schedule_harmonic_steps
                                : std::max(1.0, static_cast<double>(cfg.steps) / 2.0);
  c.shrink.min_halfwidth = cfg.schedule_min_halfwidth;
  c.seed = seed;
  c.record_iterate_loss = cfg.run.record_iterate_loss;
  return c;
}

/// Loss threshold for iterations-to-threshold, if the config asks for one.
inline std::optional<double> loss_threshold(const std::optional<double>& target_loss,
                                            const std::optional<double>& gap_fraction,
                                            double initial_loss, std::optional<double> optimum) {
  if (target_loss) return target_loss;
  if (gap_fraction) {
    if (!optimum) throw harness_error("gap fraction needs an objective with known optimum");
    return *optimum + *gap_fraction * (initial_loss - *optimum);
  }
  return std::nullopt;
}

// ------------------------------------------------------------ statistics

/// Linear-interpolation quantile of a sorted copy; infinities sort last.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  if (std::isinf(v[lo]) || std::isinf(v[hi])) return v[pos - lo < 0.5 ? lo : hi];
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

inline double iqr(const std::vector<double>& v) { return quantile(v, 0.75) - quantile(v, 0.25); }

// ---------------------------------------------------------------- formats

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline ordered_json kernel_to_json(const kernel_spec& k) {
  ordered_json j;
  j["order"] = k.order;
  j["constant"] = k.constant;
  j["mono_coeffs"] = k.mono_coeffs;
  return j;
}

/// Rebuilds a kernel record and checks it against a fresh construction.
inline kernel_spec kernel_from_json(const ordered_json& j) {
  kernel_spec k;
  k.order = j.at("order").get<int>();
  k.constant = j.at("constant").get<double>();
  k.mono_coeffs = j.at("mono_coeffs").get<std::vector<double>>();
  require_moment_checked(k);
  return k;
}

/// Writes `content` to a sibling temp file, then renames it over `path`.
inline void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw harness_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw harness_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw harness_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline experiment_config load_config(const fs::path& path) {
  return parse_config(read_file(path));
}

// -------------------------------------------------------------------- run

struct seed_summary {
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string failure;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double best_loss = 0.0;
  std::optional<double> threshold;
  std::optional<std::uint64_t> iterations_to_threshold;
  std::optional<std::uint64_t> evals_to_threshold;
  std::uint64_t total_evals = 0;
  double wall_seconds = 0.0;
};

struct seed_run {
  seed_summary summary;
  run_result result;
  std::string trace_jsonl;
};

inline std::string trace_file_name(std::size_t repeat) {
  return "trace_" + std::to_string(repeat) + ".jsonl";
}

inline std::string render_trace(const experiment_config& cfg, const optimizer_config& oc,
                                const any_objective& objective, const seed_summary& s,
                                const run_result& r) {
  std::string out;
  const auto line = [&](const ordered_json& j) { out += j.dump() + "\n"; };

  ordered_json h;
  h["schema_version"] = trace_schema_version;
  h["record"] = "header";
  h["repeat"] = s.repeat;
  h["master_seed"] = cfg.run.seed;
  h["seed"] = s.seed;
  h["objective"] = cfg.objective.kind;
  h["dim"] = objective.dim();
  h["batch_count"] = objective.batch_count();
  h["optimizer"] = config_detail::optimizer_names.format(cfg.optimizer);
  h["n"] = oc.estimator.n;
  h["epsilon"] = oc.estimator.epsilon;
  h["eta"] = oc.eta;
  h["steps"] = oc.steps;
  h["evals_per_step"] = oc.evals_per_step();
  h["radius"] = std::isinf(oc.radius) ? ordered_json("inf") : ordered_json(oc.radius);
  h["kernel"] = cfg.optimizer == optimizer_kind::kerzoo ? kernel_to_json(oc.kernel) : ordered_json();
  h["initial_loss"] = s.initial_loss;
  const auto optimum = objective.optimum();
  h["optimum"] = optimum ? ordered_json(*optimum) : ordered_json();
  h["threshold"] = s.threshold ? ordered_json(*s.threshold) : ordered_json();
  line(h);

  for (const auto& rec : r.trace) {
    ordered_json j;
    j["schema_version"] = trace_schema_version;
    j["record"] = "step";
    j["t"] = rec.t;
    j["loss"] = rec.loss;
    if (rec.loss_iterate) j["loss_iterate"] = *rec.loss_iterate;
    j["grad_norm"] = rec.grad_norm;
    j["step_size"] = rec.step_size;
    j["halfwidth"] = rec.halfwidth;
    j["beta"] = rec.beta;
    j["clipped"] = rec.clipped;
    j["eval_count"] = rec.eval_count;
    j["seed"] = rec.seed;
    j["index_begin"] = rec.index_begin;
    j["index_end"] = rec.index_end;
    if (cfg.run.record_timing) j["wall_seconds"] = rec.wall_seconds;
    line(j);
  }

  ordered_json e;
  e["schema_version"] = trace_schema_version;
  e["record"] = "end";
  e["status"] = s.ok ? "ok" : "failed";
  if (!s.ok) e["message"] = s.failure;
  e["steps"] = r.trace.size();
  e["eval_count"] = s.total_evals;
  e["final_loss"] = s.final_loss;
  e["best_loss"] = s.best_loss;
  e["iterations_to_threshold"] =
      s.iterations_to_threshold ? ordered_json(*s.iterations_to_threshold) : ordered_json();
  line(e);
  return out;
}

/// Runs repeat `i` of the experiment in memory.
inline seed_run run_repeat(const experiment_config& cfg, const any_objective& objective,
                           std::size_t i) {
  const std::uint64_t seed = repeat_seed(cfg.run.seed, i);
  const dvec theta0 = initial_point(cfg.init, objective.dim(), i);
  const optimizer_config oc = make_optimizer_config(cfg, seed, theta0);
  const double initial = full_loss(objective, theta0);
  const auto threshold =
      loss_threshold(cfg.run.target_loss, cfg.run.gap_fraction, initial, objective.optimum());

  seed_run out;
  out.result = run(objective, theta0, oc, stop_rule{threshold, cfg.run.stop_at_target});
  const auto& r = out.result;
  auto& s = out.summary;
  s.repeat = i;
  s.seed = seed;
  s.ok = r.ok();
  if (r.failure) s.failure = "step " + std::to_string(r.failure->step) + ": " + r.failure->message;
  s.initial_loss = r.initial_loss;
  s.final_loss = r.trace.empty() ? r.initial_loss : r.trace.back().loss;
  s.best_loss = r.initial_loss;
  for (const auto& rec : r.trace) s.best_loss = std::min(s.best_loss, rec.loss);
  s.threshold = threshold;
  s.iterations_to_threshold = r.iterations_to_target;
  if (r.iterations_to_target) s.evals_to_threshold = r.trace[*r.iterations_to_target - 1].eval_count;
  s.total_evals = r.final_state.evals;
  for (const auto& rec : r.trace) s.wall_seconds += rec.wall_seconds;
  out.trace_jsonl = render_trace(cfg, oc, objective, s, r);
  return out;
}

inline std::string render_summary(const experiment_config& cfg,
                                  const std::vector<seed_summary>& rows) {
  const bool timing = cfg.run.record_timing;
  std::string out =
      "row,repeat,seed,status,final_loss,best_loss,iterations_to_threshold,evals_to_threshold,"
      "total_evals,wall_seconds,final_loss_iqr,iterations_iqr\n";
  const auto reached = [](const std::optional<std::uint64_t>& v, bool has_threshold) {
    if (!has_threshold) return std::string();
    return v ? std::to_string(*v) : std::string("not-reached");
  };
  const auto count_or_marker = [](double v) {
    return std::isinf(v) ? std::string("not-reached") : csv_number(v);
  };

  std::vector<double> finals, bests, iters, evals, totals, walls;
  bool has_threshold = false;
  std::size_t ok = 0;
  for (const auto& s : rows) {
    has_threshold = has_threshold || s.threshold.has_value();
    ok += s.ok ? 1 : 0;
    out += "seed," + std::to_string(s.repeat) + "," + std::to_string(s.seed) + "," +
           (s.ok ? "ok" : "failed") + "," + csv_number(s.final_loss) + "," +
           csv_number(s.best_loss) + "," + reached(s.iterations_to_threshold, s.threshold.has_value()) +
           "," + reached(s.evals_to_threshold, s.threshold.has_value()) + "," +
           std::to_string(s.total_evals) + "," + (timing ? csv_number(s.wall_seconds) : "") + ",,\n";
    const double inf = std::numeric_limits<double>::infinity();
    finals.push_back(s.final_loss);
    bests.push_back(s.best_loss);
    iters.push_back(s.iterations_to_threshold ? static_cast<double>(*s.iterations_to_threshold) : inf);
    evals.push_back(s.evals_to_threshold ? static_cast<double>(*s.evals_to_threshold) : inf);
    totals.push_back(static_cast<double>(s.total_evals));
    walls.push_back(s.wall_seconds);
  }
  out += "median,,," + std::to_string(ok) + "/" + std::to_string(rows.size()) + "," +
         csv_number(median(finals)) + "," + csv_number(median(bests)) + "," +
         (has_threshold ? count_or_marker(median(iters)) : "") + "," +
         (has_threshold ? count_or_marker(median(evals)) : "") + "," + csv_number(median(totals)) +
         "," + (timing ? csv_number(median(walls)) : "") + "," + csv_number(iqr(finals)) + "," +
         (has_threshold ? count_or_marker(iqr(iters)) : "") + "\n";
  return out;
}

struct run_outcome {
  std::vector<seed_summary> seeds;
  bool ok() const {
    return std::all_of(seeds.begin(), seeds.end(), [](const seed_summary& s) { return s.ok; });
  }
};

/// Executes every repeat and writes the run directory. Each trace is written
/// as soon as its repeat finishes; the summary comes last.
inline run_outcome cmd_run(const experiment_config& cfg, const fs::path& out_dir) {
  validate(cfg);
  const any_objective objective = make_objective(cfg.objective);
  fs::create_directories(out_dir);
  write_atomic(out_dir / "config.resolved", to_text(cfg));
  run_outcome outcome;
  for (std::size_t i = 0; i < cfg.run.repeats; ++i) {
    auto r = run_repeat(cfg, objective, i);
    write_atomic(out_dir / trace_file_name(i), r.trace_jsonl);
    outcome.seeds.push_back(std::move(r.summary));
  }
  write_atomic(out_dir / "summary.csv", render_summary(cfg, outcome.seeds));
  return outcome;
}

// ------------------------------------------------------------ trace input

struct parsed_trace {
  ordered_json header;
  std::vector<ordered_json> steps;
  std::optional<ordered_json> end;  // missing when the writer died mid-run
};

inline parsed_trace parse_trace(const std::string& text, const std::string& origin = "trace") {
  parsed_trace out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const std::exception&) {
      throw harness_error(origin + ":" + std::to_string(line_no) + ": malformed record");
    }
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != trace_schema_version)
      throw harness_error(origin + ":" + std::to_string(line_no) + ": unsupported schema version");
    const std::string kind = j.value("record", "");
    if (kind == "header" && line_no == 1)
      out.header = std::move(j);
    else if (kind == "step" && !out.header.is_null() && !out.end)
      out.steps.push_back(std::move(j));
    else if (kind == "end" && !out.header.is_null() && !out.end)
      out.end = std::move(j);
    else
      throw harness_error(origin + ":" + std::to_string(line_no) + ": unexpected record '" + kind + "'");
  }
  if (out.header.is_null()) throw harness_error(origin + ": missing header record");
  return out;
}

inline parsed_trace read_trace(const fs::path& path) {
  return parse_trace(read_file(path), path.string());
}

// ---------------------------------------------------------------- compare

struct compare_options {
  std::optional<double> target_loss;   // overrides the runs' own thresholds
  std::optional<double> gap_fraction;
};

struct compare_row {
  std::string run;
  std::string optimizer;
  std::size_t n = 0;
  std::size_t evals_per_step = 0;
  std::size_t seeds = 0;
  std::size_t reached = 0;
  double median_iterations = 0.0;  // +inf when the median seed did not reach
  double median_evals = 0.0;
};

/// Keys two runs must agree on before their iteration counts are comparable.
inline bool is_problem_key(const std::string& key) {
  return key.rfind("objective.", 0) == 0 || key.rfind("init.", 0) == 0;
}

inline std::vector<compare_row> compare_runs(const std::vector<fs::path>& dirs,
                                             const compare_options& opt = {}) {
  if (dirs.size() < 2) throw harness_error("compare needs at least two run directories");
  if (opt.target_loss && opt.gap_fraction)
    throw harness_error("give at most one of target loss and gap fraction");
  std::vector<compare_row> rows;
  std::optional<experiment_config> baseline;
  for (const auto& dir : dirs) {
    const auto cfg = load_config(dir / "config.resolved");
    if (baseline) {
      for (const auto& [key, binding] : config_detail::bindings())
        if (is_problem_key(key) && binding.get(cfg) != binding.get(*baseline))
          throw harness_error("runs differ in " + key + " (" + binding.get(*baseline) + " vs " +
                              binding.get(cfg) + "); refusing to compare");
    } else {
      baseline = cfg;
    }
    compare_row row;
    row.run = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    row.optimizer = config_detail::optimizer_names.format(cfg.optimizer);
    std::vector<double> iters, evals;
    for (std::size_t i = 0; i < cfg.run.repeats; ++i) {
      const auto trace = read_trace(dir / trace_file_name(i));
      row.n = trace.header.at("n").get<std::size_t>();
      row.evals_per_step = trace.header.at("evals_per_step").get<std::size_t>();
      const double initial = trace.header.at("initial_loss").get<double>();
      const auto& opt_json = trace.header.at("optimum");
      const std::optional<double> optimum =
          opt_json.is_null() ? std::nullopt : std::optional<double>(opt_json.get<double>());
      std::optional<double> threshold;
      if (opt.target_loss || opt.gap_fraction)
        threshold = loss_threshold(opt.target_loss, opt.gap_fraction, initial, optimum);
      else if (!trace.header.at("threshold").is_null())
        threshold = trace.header.at("threshold").get<double>();
      if (!threshold) throw harness_error(dir.string() + ": no threshold configured or given");
      double it = std::numeric_limits<double>::infinity(), ev = it;
      for (const auto& step : trace.steps) {
        if (step.at("loss").is_number() && step.at("loss").get<double>() <= *threshold) {
          it = static_cast<double>(step.at("t").get<std::uint64_t>() + 1);
          ev = static_cast<double>(step.at("eval_count").get<std::uint64_t>());
          break;
        }
      }
      row.reached += std::isinf(it) ? 0 : 1;
      iters.push_back(it);
      evals.push_back(ev);
    }
    row.seeds = cfg.run.repeats;
    row.median_iterations = median(iters);
    row.median_evals = median(evals);
    rows.push_back(row);
  }
  return rows;
}

/// Ratio cell against the baseline: a number, "not-reached" or
/// "baseline-not-reached".
inline std::string ratio_cell(double value, double base) {
  if (std::isinf(base)) return "baseline-not-reached";
  if (std::isinf(value)) return "not-reached";
  return csv_number(value / base);
}

inline std::string render_compare(const std::vector<compare_row>& rows) {
  std::string out =
      "run,optimizer,n,evals_per_step,seeds,reached,median_iterations,median_evals,"
      "iteration_ratio,eval_ratio,equal_budget_ratio\n";
  const auto count = [](double v) { return std::isinf(v) ? std::string("not-reached") : csv_number(v); };
  const auto& base = rows.front();
  for (const auto& r : rows) {
    // equal-budget: iterations normalised by forward evaluations per step
    const double budget = r.median_iterations * static_cast<double>(r.evals_per_step);
    const double base_budget = base.median_iterations * static_cast<double>(base.evals_per_step);
    out += r.run + "," + r.optimizer + "," + std::to_string(r.n) + "," +
           std::to_string(r.evals_per_step) + "," + std::to_string(r.seeds) + "," +
           std::to_string(r.reached) + "," + count(r.median_iterations) + "," +
           count(r.median_evals) + "," + ratio_cell(r.median_iterations, base.median_iterations) +
           "," + ratio_cell(r.median_evals, base.median_evals) + "," +
           ratio_cell(budget, base_budget) + "\n";
  }
  return out;
}

// ------------------------------------------------------------------- tune

struct tune_row {
  double eta = 0.0;
  double median_iterations = 0.0;  // +inf when not reached
  double median_final_loss = 0.0;
  std::size_t reached = 0;
};

struct tune_result {
  std::vector<tune_row> rows;
  std::optional<double> best_eta;  // empty when no rate reached the threshold
};

/// Grid search over tune.eta_grid by median iterations-to-threshold; ties go
/// to the lower median final loss, then to the earlier grid entry.
inline tune_result tune_learning_rate(const experiment_config& cfg) {
  validate(cfg);
  if (cfg.eta_grid.empty()) throw config_error("tune.eta_grid", "empty learning-rate grid");
  if (!cfg.run.target_loss && !cfg.run.gap_fraction)
    throw config_error("run.gap_fraction", "tuning needs a threshold");
  const any_objective objective = make_objective(cfg.objective);
  tune_result out;
  const tune_row* best = nullptr;
  for (double eta : cfg.eta_grid) {
    experiment_config c = cfg;
    c.eta = eta;
    tune_row row;
    row.eta = eta;
    std::vector<double> iters, finals;
    for (std::size_t i = 0; i < c.run.repeats; ++i) {
      const auto r = run_repeat(c, objective, i);
      const auto& s = r.summary;
      iters.push_back(s.ok && s.iterations_to_threshold
                          ? static_cast<double>(*s.iterations_to_threshold)
                          : std::numeric_limits<double>::infinity());
      finals.push_back(s.ok ? s.final_loss : std::numeric_limits<double>::infinity());
      row.reached += s.ok && s.iterations_to_threshold ? 1 : 0;
    }
    row.median_iterations = median(iters);
    row.median_final_loss = median(finals);
    out.rows.push_back(row);
  }
  for (const auto& row : out.rows) {
    if (std::isinf(row.median_iterations)) continue;
    if (!best || row.median_iterations < best->median_iterations ||
        (row.median_iterations == best->median_iterations &&
         row.median_final_loss < best->median_final_loss))
      best = &row;
  }
  if (best) out.best_eta = best->eta;
  return out;
}

inline std::string render_tune(const tune_result& t) {
  std::string out = "eta,median_iterations,median_final_loss,reached,selected\n";
  for (const auto& r : t.rows)
    out += csv_number(r.eta) + "," +
           (std::isinf(r.median_iterations) ? std::string("not-reached")
                                            : csv_number(r.median_iterations)) +
           "," + csv_number(r.median_final_loss) + "," + std::to_string(r.reached) + "," +
           (t.best_eta && *t.best_eta == r.eta ? "yes" : "no") + "\n";
  return out;
}

// ---------------------------------------------------------- kernel-check

inline std::string render_kernel_check(const kernel_spec& k, const moment_report& report) {
  std::string out = "# kernel order=" + std::to_string(k.order) + " constant=" +
                    csv_number(k.constant) + " mono_coeffs=";
  for (std::size_t i = 0; i < k.mono_coeffs.size(); ++i)
    out += (i ? ";" : "") + csv_number(k.mono_coeffs[i]);
  out += "\npower,expectation,plain_integral,target,status\n";
  for (const auto& row : report.rows)
    out += std::to_string(row.power) + "," + csv_number(row.expectation) + "," +
           csv_number(row.plain_integral) + "," + csv_number(row.target) + "," +
           (row.pass ? "pass" : "fail") + "\n";
  return out;
}

// ------------------------------------------------------------ bias-sweep

inline std::string slope_summary(const bias_report& r) {
  std::string s = "# method=" + r.method + " slope=" + (r.slope ? csv_number(*r.slope) : "undefined");
  s += " fitted_points=" + std::to_string(r.fitted_points);
  if (r.slope) s += " residual=" + csv_number(r.residual);
  return s;
}

inline std::string render_bias_report(const bias_report& r) {
  std::string out = "epsilon,bias,stderr,method,second_moment,exact\n";
  for (const auto& p : r.points)
    out += csv_number(p.epsilon) + "," + csv_number(p.bias) + "," + csv_number(p.standard_error) +
           "," + r.method + "," + csv_number(p.second_moment) + "," + (p.exact ? "true" : "false") +
           "\n";
  out += slope_summary(r) + "\n";
  return out;
}

// ---------------------------------------------------------- dump-dataset

inline std::string render_dataset(const labeled_dataset& data) {
  std::string out = "sample,batch,label";
  for (std::size_t f = 0; f < data.features; ++f) out += ",x" + std::to_string(f);
  out += "\n";
  for (std::size_t i = 0; i < data.samples(); ++i) {
    out += std::to_string(i) + "," + std::to_string(i / data.batch_size) + "," +
           std::to_string(data.y[i]);
    for (double v : data.row(i)) out += "," + csv_number(v);
    out += "\n";
  }
  return out;
}

}  // namespace kerzoo
