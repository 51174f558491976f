#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "kerzoo/bias_lab.hpp"
#include "support/oracles.hpp"

using namespace kerzoo;

namespace {

const std::vector<double> grid{1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
const odd_poly cubic({1.0}, {1.0});
const odd_poly quintic({1.0}, {1.0}, {1.0});
const double origin[1] = {0.0};

}  // namespace

TEST(Expected1d, VanillaCubicIsOnePlusEpsSquared) {
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto e = expected_estimate_1d(cubic, 0.0, eps, bias_method::vanilla(), default_rule());
    EXPECT_NEAR(e.value, 1.0 + eps * eps, 1e-10);
    EXPECT_TRUE(e.exact);
  }
}

TEST(Expected1d, KernelCancelsCubicTerm) {
  for (double c : {1.0, 4.0})
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      const auto e = expected_estimate_1d(cubic, 0.0, eps, bias_method::with_kernel(construct_kernel(3, c)),
                                          default_rule());
      EXPECT_NEAR(e.value, 1.0, 1e-10);
      EXPECT_TRUE(e.exact);
    }
}

TEST(Expected1d, RawScaleCarriesConstant) {
  const auto e = expected_estimate_1d(cubic, 0.0, 1e-2, bias_method::with_kernel(construct_kernel(3, 4.0)),
                                      default_rule(), scale_mode::raw);
  EXPECT_NEAR(e.value, 4.0, 1e-10);
}

TEST(Expected1d, QuinticResidualMatchesPrediction) {
  // L = r + r^3 + r^5 at 0: f^(5) = 120, so the K3 residual is eps^4 E[r^5 K3] / C
  const auto k = construct_kernel(3, 1.0);
  const double moment = oracle::kernel_moment(k.mono_coeffs, 5);
  for (double eps : {1e-1, 5e-2}) {
    const auto e = expected_estimate_1d(quintic, 0.0, eps, bias_method::with_kernel(k), default_rule());
    EXPECT_NEAR(e.value - 1.0, std::pow(eps, 4) * moment, 1e-12);
  }
}

TEST(Expected1d, RejectsMultiDimensional) {
  const odd_poly two({1.0, 1.0}, {0.0, 0.0});
  EXPECT_THROW(expected_estimate_1d(two, 0.0, 1e-2, bias_method::vanilla(), default_rule()),
               std::invalid_argument);
}

TEST(BiasSweep, VanillaCubicSlopeTwo) {
  const auto r = bias_sweep(cubic, origin, grid, bias_method::vanilla());
  ASSERT_TRUE(r.slope);
  EXPECT_NEAR(*r.slope, 2.0, 0.05);
  EXPECT_EQ(r.fitted_points, grid.size());
  for (const auto& p : r.points) EXPECT_GE(p.bias, 0.0);
}

TEST(BiasSweep, KernelCubicHasNoSlope) {
  const auto r = bias_sweep(cubic, origin, grid, bias_method::with_kernel(construct_kernel(3, 4.0)));
  EXPECT_FALSE(r.slope);
  for (const auto& p : r.points) EXPECT_LE(p.bias, 1e-10);
}

TEST(BiasSweep, KernelNeverWorseOnCubic) {
  const auto v = bias_sweep(cubic, origin, grid, bias_method::vanilla());
  for (int order : {1, 3, 5, 7}) {
    // K1 only satisfies the first moment; its residual is the cubic term itself
    if (order == 1) continue;
    const auto k = bias_sweep(cubic, origin, grid, bias_method::with_kernel(construct_kernel(order, 1.0)));
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LE(k.points[i].bias, v.points[i].bias);
  }
}

TEST(BiasSweep, LowDegreeExactAtOtherPoints) {
  for (int order : {3, 5, 7})
    for (double theta : {-0.7, 0.4, 1.3}) {
      const double point[1] = {theta};
      const auto r = bias_sweep(odd_poly({0.3}, {-2.0}), point, grid,
                                bias_method::with_kernel(construct_kernel(order, 4.0)));
      for (const auto& p : r.points) EXPECT_LE(p.bias, 1e-9) << "order " << order;
    }
}

TEST(BiasSweep, QuinticSlopes) {
  const auto k3 = bias_sweep(quintic, origin, grid, bias_method::with_kernel(construct_kernel(3, 1.0)));
  ASSERT_TRUE(k3.slope);
  EXPECT_NEAR(*k3.slope, 4.0, 0.1);
  const auto k5 = bias_sweep(quintic, origin, grid, bias_method::with_kernel(construct_kernel(5, 1.0)));
  for (const auto& p : k5.points) EXPECT_LE(p.bias, 1e-10);
  EXPECT_FALSE(k5.slope);
}

TEST(BiasSweep, GridValidation) {
  const std::vector<double> short_grid{1e-1, 1e-2, 1e-3};
  const std::vector<double> increasing{1e-3, 1e-2, 1e-1, 1.0};
  const std::vector<double> negative{1e-1, 1e-2, 0.0, -1.0};
  EXPECT_THROW(bias_sweep(cubic, origin, short_grid, bias_method::vanilla()), std::invalid_argument);
  EXPECT_THROW(bias_sweep(cubic, origin, increasing, bias_method::vanilla()), std::invalid_argument);
  EXPECT_THROW(bias_sweep(cubic, origin, negative, bias_method::vanilla()), std::invalid_argument);
}

TEST(BiasSweep, MonteCarloCubicSlope) {
  const odd_poly cubic3({1.0, 0.5, -1.0}, {1.0, 2.0, 0.5});
  const std::vector<double> theta{0.1, -0.2, 0.3};
  const std::vector<double> coarse{4e-1, 2e-1, 1e-1, 5e-2};
  bias_sweep_options opt;
  opt.samples = 20000;
  opt.seed = 5;
  const auto v = bias_sweep(cubic3, theta, coarse, bias_method::vanilla(), opt);
  ASSERT_TRUE(v.slope);
  EXPECT_NEAR(*v.slope, 2.0, 0.1);
  for (const auto& p : v.points) EXPECT_GT(p.standard_error, 0.0);
}

TEST(BiasSweep, MonteCarloErrorShrinksWithBudget) {
  const odd_poly cubic3({1.0, 0.5, -1.0}, {1.0, 2.0, 0.5});
  const std::vector<double> theta{0.1, -0.2, 0.3};
  const std::vector<double> coarse{4e-1, 2e-1, 1e-1, 5e-2};
  bias_sweep_options opt;
  opt.samples = 10000;
  const auto small = bias_sweep(cubic3, theta, coarse, bias_method::vanilla(), opt);
  opt.samples = 20000;
  const auto large = bias_sweep(cubic3, theta, coarse, bias_method::vanilla(), opt);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const double ratio = large.points[i].standard_error / small.points[i].standard_error;
    EXPECT_GE(ratio, 0.6);
    EXPECT_LE(ratio, 0.8);
  }
}

TEST(BiasSweep, SeedIndependentOnExactPath) {
  bias_sweep_options a, b;
  a.seed = 1;
  b.seed = 999;
  const auto ra = bias_sweep(quintic, origin, grid, bias_method::with_kernel(construct_kernel(3, 4.0)), a);
  const auto rb = bias_sweep(quintic, origin, grid, bias_method::with_kernel(construct_kernel(3, 4.0)), b);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(ra.points[i].bias, rb.points[i].bias);
}

TEST(VarianceSweep, ScalesWithHalfwidth) {
  const std::vector<kernel_spec> kernels{construct_kernel(1, 1.0), construct_kernel(3, 1.0)};
  const std::vector<std::uint64_t> steps{0, 100};
  const auto rows = variance_sweep(kernels, r_schedule::harmonic(100, 0.1), steps);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NEAR(rows[0].proxy, 1.8, 1e-10);
  EXPECT_NEAR(rows[2].proxy, 6.25, 1e-10);
  EXPECT_NEAR(rows[1].scaled_proxy, 0.25 * 1.8, 1e-10);
}
