#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "kerzoo/legendre_kernel.hpp"
#include "kerzoo/random.hpp"
#include "support/oracles.hpp"

using namespace kerzoo;

TEST(Legendre, KnownValues) {
  EXPECT_DOUBLE_EQ(legendre_eval(0, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(legendre_eval(1, 0.3), 0.3);
  EXPECT_NEAR(legendre_eval(3, 0.5), -0.4375, 1e-15);
  for (unsigned m = 0; m < 12; ++m) {
    EXPECT_NEAR(legendre_eval(m, 1.0), 1.0, 1e-14);
    EXPECT_NEAR(legendre_eval(m, -1.0), m % 2 ? -1.0 : 1.0, 1e-14);
  }
}

TEST(Legendre, CoefficientsMatchRecurrence) {
  for (unsigned m = 0; m < 10; ++m) {
    const auto c = legendre_coefficients(m);
    for (double r : {-0.9, -0.3, 0.0, 0.41, 0.77}) {
      double v = 0, p = 1;
      for (double ci : c) {
        v += ci * p;
        p *= r;
      }
      EXPECT_NEAR(v, legendre_eval(m, r), 1e-13) << "m=" << m << " r=" << r;
    }
  }
}

TEST(Legendre, DerivativeAtZero) {
  EXPECT_NEAR(normalized_legendre_deriv_at_zero(1), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(legendre_deriv_at_zero(3), -1.5, 1e-15);
  EXPECT_NEAR(legendre_deriv_at_zero(5), 15.0 / 8.0, 1e-15);
  for (unsigned m = 0; m <= 8; m += 2) EXPECT_EQ(legendre_deriv_at_zero(m), 0.0);
}

TEST(Quadrature, WeightsAndExactness) {
  const auto& rule = default_rule();
  EXPECT_EQ(rule.size(), 64u);
  EXPECT_EQ(rule.exact_degree, 127);
  double sum = 0;
  for (double w : rule.weights) sum += w;
  EXPECT_NEAR(sum, 2.0, 1e-14);
  for (int k = 0; k <= 126; k += 7)
    EXPECT_NEAR(rule.expectation([&](double r) { return std::pow(r, k); }),
                oracle::uniform_monomial_mean(k), 1e-14)
        << "k=" << k;
}

TEST(Quadrature, SmallRuleIsExactToItsDegree) {
  const auto rule = gauss_legendre(3);
  EXPECT_EQ(rule.exact_degree, 5);
  EXPECT_NEAR(rule.expectation([](double r) { return std::pow(r, 4); }), 0.2, 1e-15);
  EXPECT_GT(std::abs(rule.expectation([](double r) { return std::pow(r, 6); }) - 1.0 / 7.0), 1e-4);
}

TEST(Kernel, ClosedForms) {
  for (int order : {1, 3, 5, 7})
    for (double c : {1.0, 4.0}) {
      const auto k = construct_kernel(order, c);
      const auto ref = oracle::closed_form_kernel(order, c);
      ASSERT_EQ(k.mono_coeffs.size(), ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i)
        EXPECT_NEAR(k.mono_coeffs[i], ref[i], 1e-12 * std::max(1.0, std::abs(ref[i])))
            << "order " << order << " C " << c << " coeff " << i;
    }
}

TEST(Kernel, FirstOrderIsLinear) {
  const auto k = construct_kernel(1, 1.0 / 3.0);
  EXPECT_EQ(k(1.0), 1.0);
  EXPECT_NEAR(k(0.5), 0.5, 1e-16);
}

TEST(Kernel, ExactlyOdd) {
  const auto k = construct_kernel(5, 4.0);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double r = 2.0 * to_unit_interval(counter_stream(5, i, stream::scalar).block(0)[0]) - 1.0;
    EXPECT_LE(std::abs(k(-r) + k(r)), 1e-14);
  }
}

TEST(Kernel, RejectsEvenOrBadConstant) {
  EXPECT_THROW(construct_kernel(4, 1.0), std::invalid_argument);
  EXPECT_THROW(construct_kernel(0, 1.0), std::invalid_argument);
  EXPECT_THROW(construct_kernel(3, 0.0), std::invalid_argument);
  EXPECT_THROW(construct_kernel(3, -2.0), std::invalid_argument);
}

TEST(Kernel, ScalesLinearlyInConstant) {
  const auto a = construct_kernel(7, 1.0), b = construct_kernel(7, 2.5);
  for (std::size_t i = 0; i < a.mono_coeffs.size(); ++i)
    EXPECT_NEAR(b.mono_coeffs[i], 2.5 * a.mono_coeffs[i], 1e-12 * std::abs(b.mono_coeffs[i]));
}

TEST(Moments, MatchOracleAndTargets) {
  for (int order : {1, 3, 5, 7, 9})
    for (double c : {1.0, 4.0}) {
      const auto k = construct_kernel(order, c);
      const auto report = check_moments(k, default_rule());
      EXPECT_TRUE(report.all_pass()) << "order " << order;
      ASSERT_EQ(report.rows.size(), static_cast<std::size_t>(order + 1));
      for (const auto& row : report.rows) {
        EXPECT_NEAR(row.expectation, oracle::kernel_moment(k.mono_coeffs, row.power), 1e-10);
        EXPECT_DOUBLE_EQ(row.plain_integral, 2.0 * row.expectation);
      }
      EXPECT_EQ(report.rows[1].target, c);
    }
}

TEST(Moments, ResidualMomentIsNonzero) {
  // first power past the order, where cancellation stops
  const double expected[] = {3.0 / 5.0, -5.0 / 21.0, 35.0 / 429.0, -63.0 / 2431.0};
  int i = 0;
  for (int order : {1, 3, 5, 7}) {
    const auto k = construct_kernel(order, 1.0);
    EXPECT_NEAR(kernel_moment(k, order + 2, default_rule()), expected[i++], 1e-12);
  }
}

TEST(Moments, CorruptedKernelFails) {
  auto k = construct_kernel(3, 4.0);
  k.mono_coeffs[1] *= 1.0 + 1e-6;
  EXPECT_FALSE(check_moments(k, default_rule()).all_pass());
}

TEST(Moments, CoarseRuleRejected) {
  EXPECT_THROW(check_moments(construct_kernel(7, 1.0), gauss_legendre(4)), insufficient_quadrature);
  EXPECT_NO_THROW(check_moments(construct_kernel(7, 1.0), gauss_legendre(9)));
}

TEST(VarianceProxy, ValuesAndMonotonicity) {
  const double expected[] = {1.8, 6.25, 11025.0 / 832.0, 99225.0 / 4352.0};
  double previous = 0;
  int i = 0;
  for (int order : {1, 3, 5, 7}) {
    const auto k = construct_kernel(order, 1.0);
    const double v = kernel_second_moment(k, default_rule());
    EXPECT_NEAR(v, expected[i], 1e-10);
    EXPECT_NEAR(v, oracle::kernel_second_moment(k.mono_coeffs), 1e-10);
    EXPECT_GT(v, previous);
    previous = v;
    ++i;
  }
}
