// kerzoo: command-line front end for runs, comparisons and kernel/bias checks.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kerzoo/kerzoo.hpp"

namespace {

using namespace kerzoo;

// Output location: --out, then $KERZOO_OUTPUT_DIR, then the config value.
fs::path output_dir(const std::string& flag, const experiment_config& cfg) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("KERZOO_OUTPUT_DIR"); env && *env) return env;
  return cfg.run.output_dir;
}

void emit(const std::string& text, const std::string& out_file) {
  if (out_file.empty())
    std::cout << text;
  else
    write_atomic(out_file, text);
}

experiment_config load_with_overrides(const std::string& path, const std::vector<std::string>& sets,
                                      const std::optional<std::uint64_t>& seed) {
  experiment_config cfg = path.empty() ? experiment_config{} : load_config(path);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw config_error(kv, "--set expects key=value");
    set_key(cfg, config_detail::trim(kv.substr(0, eq)), config_detail::trim(kv.substr(eq + 1)));
  }
  if (seed) cfg.run.seed = *seed;
  validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-smoothed zeroth-order optimization toolkit"};
  app.require_subcommand(1);

  std::string config_path, out;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;

  auto* run_cmd = app.add_subcommand("run", "Run an experiment config (all repeats)");
  run_cmd->add_option("--config", config_path, "Experiment config file")->required();
  run_cmd->add_option("--seed", seed, "Override run.seed");
  run_cmd->add_option("--out", out, "Output directory");
  run_cmd->add_option("--set", sets, "Override a config key (key=value)");

  auto* tune_cmd = app.add_subcommand("tune", "Grid-search optimizer.eta over tune.eta_grid");
  tune_cmd->add_option("--config", config_path, "Experiment config file")->required();
  tune_cmd->add_option("--seed", seed, "Override run.seed");
  tune_cmd->add_option("--out", out, "Write the table to this file");
  tune_cmd->add_option("--set", sets, "Override a config key (key=value)");

  std::vector<std::string> dirs;
  std::optional<double> target_loss, gap_fraction;
  auto* compare_cmd = app.add_subcommand("compare", "Compare run directories (first is baseline)");
  compare_cmd->add_option("dirs", dirs, "Run directories")->required()->expected(2, -1);
  compare_cmd->add_option("--target-loss", target_loss, "Absolute loss threshold");
  compare_cmd->add_option("--gap-fraction", gap_fraction, "Threshold L* + f (L0 - L*)");
  compare_cmd->add_option("--out", out, "Write the CSV to this file");

  int order = 3;
  double constant = 4.0;
  auto* kernel_cmd = app.add_subcommand("kernel-check", "Construct a kernel and check its moments");
  kernel_cmd->add_option("order", order, "Kernel order (odd)")->required();
  kernel_cmd->add_option("constant", constant, "Kernel constant C")->required();
  kernel_cmd->add_option("--out", out, "Write the CSV to this file");

  std::string probe = "cubic", method = "vanilla";
  std::vector<double> grid{1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
  double theta = 0.0;
  std::size_t samples = 20000;
  auto* bias_cmd = app.add_subcommand("bias-sweep", "Measure estimator bias over an epsilon grid");
  bias_cmd->add_option("--probe", probe, "cubic | quintic (ignored with --config)")
      ->check(CLI::IsMember({"cubic", "quintic"}));
  bias_cmd->add_option("--config", config_path, "Use the objective and init point of a config");
  bias_cmd->add_option("--method", method, "vanilla | kernel")
      ->check(CLI::IsMember({"vanilla", "kernel"}));
  bias_cmd->add_option("--order", order, "Kernel order");
  bias_cmd->add_option("--constant", constant, "Kernel constant");
  bias_cmd->add_option("--eps", grid, "Strictly decreasing epsilon grid")->delimiter(',');
  bias_cmd->add_option("--theta", theta, "Evaluation point of the 1-d probes");
  bias_cmd->add_option("--samples", samples, "Monte Carlo directions when d > 1");
  bias_cmd->add_option("--seed", seed, "Monte Carlo seed");
  bias_cmd->add_option("--out", out, "Write the CSV to this file");

  auto* dump_cmd = app.add_subcommand("dump-dataset", "Write the synthetic dataset of a config");
  dump_cmd->add_option("--config", config_path, "Experiment config file")->required();
  dump_cmd->add_option("--out", out, "Write the CSV to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const auto cfg = load_with_overrides(config_path, sets, seed);
      const fs::path dir = output_dir(out, cfg);
      const auto outcome = cmd_run(cfg, dir);
      for (const auto& s : outcome.seeds) {
        std::cout << "repeat " << s.repeat << " seed " << s.seed << ": "
                  << (s.ok ? "ok" : "failed (" + s.failure + ")") << ", final loss "
                  << csv_number(s.final_loss);
        if (s.threshold)
          std::cout << ", iterations to threshold "
                    << (s.iterations_to_threshold ? std::to_string(*s.iterations_to_threshold)
                                                  : "not-reached");
        std::cout << "\n";
      }
      std::cout << "wrote " << dir.string() << "\n";
      return outcome.ok() ? 0 : 1;
    }
    if (tune_cmd->parsed()) {
      const auto cfg = load_with_overrides(config_path, sets, seed);
      const auto result = tune_learning_rate(cfg);
      emit(render_tune(result), out);
      if (!result.best_eta) {
        std::cerr << "no learning rate in the grid reached the threshold\n";
        return 1;
      }
      std::cerr << "selected optimizer.eta = " << config_detail::format_double(*result.best_eta)
                << "\n";
      return 0;
    }
    if (compare_cmd->parsed()) {
      std::vector<fs::path> paths(dirs.begin(), dirs.end());
      emit(render_compare(compare_runs(paths, {target_loss, gap_fraction})), out);
      return 0;
    }
    if (kernel_cmd->parsed()) {
      const auto k = construct_kernel(order, constant);
      const auto report = check_moments(k, default_rule());
      emit(render_kernel_check(k, report), out);
      return report.all_pass() ? 0 : 1;
    }
    if (bias_cmd->parsed()) {
      const bias_method m = method == "vanilla" ? bias_method::vanilla()
                                                : bias_method::with_kernel(construct_kernel(order, constant));
      bias_sweep_options opt;
      opt.samples = samples;
      opt.seed = seed.value_or(0);
      bias_report report;
      if (!config_path.empty()) {
        const auto cfg = load_config(config_path);
        const auto objective = make_objective(cfg.objective);
        const auto theta0 = initial_point(cfg.init, objective.dim(), 0);
        report = bias_sweep(objective, theta0, grid, m, opt);
      } else {
        const odd_poly objective({1.0}, {1.0}, {probe == "quintic" ? 1.0 : 0.0});
        const double point[1] = {theta};
        report = bias_sweep(objective, point, grid, m, opt);
      }
      emit(render_bias_report(report), out);
      if (!out.empty()) std::cout << slope_summary(report) << "\n";
      return 0;
    }
    if (dump_cmd->parsed()) {
      const auto cfg = load_config(config_path);
      const auto objective = make_objective(cfg.objective);
      const auto* data = objective.dataset();
      if (!data) throw config_error("objective.kind", "objective '" + cfg.objective.kind + "' has no dataset");
      emit(render_dataset(*data), out);
      return 0;
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
