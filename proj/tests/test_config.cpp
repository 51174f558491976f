#include <string>

#include <gtest/gtest.h>

#include "kerzoo/config.hpp"

using namespace kerzoo;

namespace {

std::string error_key(const std::string& text) {
  try {
    parse_config(text);
  } catch (const config_error& e) {
    return e.key();
  }
  return "<accepted>";
}

}  // namespace

TEST(Config, DefaultsMirrorRecommendedSettings) {
  const experiment_config c = parse_config("");
  EXPECT_EQ(c.kernel_order, 3);
  EXPECT_EQ(c.kernel_constant, 4.0);
  EXPECT_EQ(c.estimator.n, 3u);
  EXPECT_EQ(c.estimator.epsilon, 1e-3);
  EXPECT_EQ(c.radius, "inf");
  EXPECT_EQ(c.point, eval_point::iterate);
  EXPECT_EQ(c.lr, lr_schedule::constant);
  EXPECT_EQ(c.estimator.direction, direction_mode::unit_sphere);
  EXPECT_EQ(c.schedule_rule, r_schedule::rule_kind::harmonic);
}

TEST(Config, ParsesValuesCommentsAndWhitespace) {
  const auto c = parse_config(
      "# comment\n"
      "  objective.kind = rosenbrock \n"
      "objective.dim=5\n"
      "\n"
      "optimizer.kind = zo_sgd\n"
      "optimizer.eta = 2.5e-3\n"
      "estimator.fixed_r = 0.5\n"
      "run.target_loss = 0.01\n"
      "tune.eta_grid = 0.1, 0.2,0.3\n");
  EXPECT_EQ(c.objective.kind, "rosenbrock");
  EXPECT_EQ(c.objective.dim, 5u);
  EXPECT_EQ(c.optimizer, optimizer_kind::zo_sgd);
  EXPECT_EQ(c.eta, 2.5e-3);
  EXPECT_EQ(c.estimator.fixed_r, 0.5);
  EXPECT_EQ(c.run.target_loss, 0.01);
  EXPECT_EQ(c.eta_grid, (dvec{0.1, 0.2, 0.3}));
}

TEST(Config, RoundTripsThroughText) {
  auto c = parse_config("objective.kind = odd_poly\nobjective.dim = 3\nobjective.c3 = 1,2,3\n"
                        "optimizer.eta = 0.1\nrun.gap_fraction = none\nschedule.harmonic_steps = 37\n");
  c.eta = 0.1 + 0.2;  // not exactly representable in short form
  const auto text = to_text(c);
  const auto back = parse_config(text);
  EXPECT_EQ(to_text(back), text);
  EXPECT_EQ(back.eta, c.eta);
  EXPECT_EQ(back.objective.c3, (dvec{1, 2, 3}));
  EXPECT_EQ(back.schedule_harmonic_steps, 37.0);
}

TEST(Config, EmitsEveryKeyOnce) {
  const auto text = to_text(experiment_config{});
  for (const auto& [key, binding] : config_detail::bindings()) {
    const auto pos = text.find("\n" + key + " = ");
    EXPECT_TRUE(text.rfind(key + " = ", 0) == 0 || pos != std::string::npos) << key;
  }
}

TEST(Config, UnknownKeyNamed) {
  EXPECT_EQ(error_key("optimizer.etaa = 0.1\n"), "optimizer.etaa");
  EXPECT_EQ(error_key("eta = 0.1\n"), "eta");
}

TEST(Config, RepeatedKeyRejected) {
  EXPECT_EQ(error_key("optimizer.eta = 0.1\noptimizer.eta = 0.2\n"), "optimizer.eta");
}

TEST(Config, BadValuesNamed) {
  EXPECT_EQ(error_key("kernel.order = 4\n"), "kernel.order");
  EXPECT_EQ(error_key("kernel.order = three\n"), "kernel.order");
  EXPECT_EQ(error_key("kernel.constant = 0\n"), "kernel.constant");
  EXPECT_EQ(error_key("optimizer.eta = -1\n"), "optimizer.eta");
  EXPECT_EQ(error_key("optimizer.steps = 0\n"), "optimizer.steps");
  EXPECT_EQ(error_key("optimizer.kind = adam\n"), "optimizer.kind");
  EXPECT_EQ(error_key("optimizer.radius = -3\n"), "optimizer.radius");
  EXPECT_EQ(error_key("estimator.n = 0\n"), "estimator.n");
  EXPECT_EQ(error_key("estimator.antithetic = yes\n"), "estimator.antithetic");
  EXPECT_EQ(error_key("estimator.fixed_r = 2\n"), "estimator.fixed_r");
  EXPECT_EQ(error_key("objective.kind = mnist\n"), "objective.kind");
  EXPECT_EQ(error_key("objective.kind = rosenbrock\nobjective.dim = 1\n"), "objective.dim");
  EXPECT_EQ(error_key("objective.kind = logistic\nobjective.batch_size = 0\n"), "objective.batch_size");
  EXPECT_EQ(error_key("objective.kind = odd_poly\nobjective.dim = 3\nobjective.c1 = 1,2\n"), "objective.c1");
  EXPECT_EQ(error_key("objective.kind = mlp\nobjective.dim = 200\nobjective.hidden = 100\n"),
            "objective.hidden");
  EXPECT_EQ(error_key("run.target_loss = 1\nrun.gap_fraction = 0.1\n"), "run.gap_fraction");
  EXPECT_EQ(error_key("objective.kind = logistic\nrun.gap_fraction = 0.1\n"), "run.gap_fraction");
  EXPECT_EQ(error_key("run.repeats = 0\n"), "run.repeats");
  EXPECT_EQ(error_key("schedule.min_halfwidth = 0\n"), "schedule.min_halfwidth");
}

TEST(Config, MissingEqualsRejected) {
  EXPECT_THROW(parse_config("optimizer.eta 0.1\n"), config_error);
}

TEST(Config, RadiusForms) {
  EXPECT_EQ(parse_config("optimizer.radius = auto\n").radius, "auto");
  EXPECT_EQ(parse_config("optimizer.radius = 12.5\n").radius, "12.5");
}

TEST(Config, SetAndGetKey) {
  experiment_config c;
  set_key(c, "estimator.scale_mode", "unbiased");
  EXPECT_EQ(c.estimator.scale, scale_mode::unbiased);
  EXPECT_EQ(get_key(c, "estimator.scale_mode"), "unbiased");
  EXPECT_THROW(set_key(c, "nope", "1"), config_error);
}
