// Copyright 2026 The Fourier Accountant Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "fourier_accountant/error_bounds.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fourier_accountant/discretization.hpp"
#include "test_support.hpp"

namespace fa = fourier_accountant;

namespace {

TEST(AlphaBound, ClosedFormArithmetic) {
  const fa::BoundReport r = fa::alpha_bound(2.0, 0.01, 5.0);
  ASSERT_TRUE(r.value);
  EXPECT_DOUBLE_EQ(*r.value, 0.01 * 0.01 * 5 * 6 / (0.99 * 4));
  EXPECT_NEAR(*r.value, 7.575757575757576e-4, 1e-18);
  EXPECT_TRUE(r.valid);
}

TEST(AlphaBound, VanishingSamplingRate) {
  const fa::BoundReport r = fa::alpha_bound(1.0, 1e-6, 1.0);
  ASSERT_TRUE(r.value);
  EXPECT_DOUBLE_EQ(*r.value, 2e-12 / (1 - 1e-6));
}

TEST(AlphaBound, EnvelopeEndsAtLambdaMax) {
  // sigma^2 ln(1/(q sigma)) = 4 ln 50 at sigma = 2, q = 0.01.
  const double lambda_max = fa::moment_bound_lambda_max(2.0, 0.01);
  EXPECT_DOUBLE_EQ(lambda_max, 4.0 * std::log(50.0));
  EXPECT_TRUE(fa::alpha_bound(2.0, 0.01, lambda_max - 1e-9).valid);
  const fa::BoundReport out = fa::alpha_bound(2.0, 0.01, lambda_max + 1e-9);
  EXPECT_FALSE(out.valid);
  EXPECT_TRUE(out.value);  // still computed, just flagged
  ASSERT_EQ(out.violations.size(), 1u);
}

TEST(AlphaBound, FlagsEachFailedPrecondition) {
  EXPECT_FALSE(fa::alpha_bound(0.9, 0.01, 2.0).valid);               // sigma < 1
  EXPECT_FALSE(fa::alpha_bound(2.0, 1.0 / 32.0, 2.0).valid);         // q = 1/(16 sigma)
  EXPECT_FALSE(fa::alpha_bound(2.0, 0.01, 0.5).valid);               // lambda < 1
  EXPECT_EQ(fa::alpha_bound(0.5, 0.5, 100.0).violations.size(), 3u);
}

TEST(AlphaBound, NoValueAtFullSampling) {
  const fa::BoundReport r = fa::alpha_bound(2.0, 1.0, 2.0);
  EXPECT_FALSE(r.value);
  EXPECT_FALSE(r.valid);
}

struct TailRow {
  double L;
  double expected;
};

TEST(TailEstimate, ReproducesConvergenceTableColumn) {
  // sigma = 1.5, q = 0.01, k = 1e4; values as printed to three digits.
  const std::vector<TailRow> rows = {{2.0, 3.32e-1}, {4.0, 4.96e-3},  {6.0, 3.32e-6},
                                     {8.0, 1.00e-10}, {10.0, 1.36e-16}, {12.0, 8.30e-24}};
  for (const TailRow& row : rows) {
    const fa::BoundReport r = fa::tail_estimate(1.5, 0.01, 10000, row.L);
    ASSERT_TRUE(r.value);
    EXPECT_LE(fa_test::rel_diff(*r.value, row.expected), 6e-3) << "L=" << row.L;
  }
}

TEST(TailEstimate, MonotoneInLAndK) {
  double prev = INFINITY;
  for (double L = 2.0; L <= 18.0; L += 0.5) {
    const fa::BoundReport r = fa::tail_estimate(2.0, 0.01, 10000, L);
    ASSERT_TRUE(r.valid) << "L=" << L;
    EXPECT_LT(*r.value, prev);
    prev = *r.value;
  }
  prev = 0.0;
  for (std::uint64_t k = 1; k <= 1u << 20; k *= 2) {
    const double v = *fa::tail_estimate(2.0, 0.01, k, 10.0).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(TailEstimate, ValidityFollowsAlpha) {
  EXPECT_TRUE(fa::tail_estimate(2.0, 0.01, 100, 12.0).valid);
  // lambda = L/2 = 16 > 4 ln 50.
  EXPECT_FALSE(fa::tail_estimate(2.0, 0.01, 100, 32.0).valid);
}

TEST(TailEstimate, HeterogeneousAddsExponents) {
  const std::vector<fa::TailComponent> parts = {{1.5, 0.01, 100}, {2.0, 0.02, 50}};
  const double a1 = *fa::alpha_bound(1.5, 0.01, 5.0).value;
  const double a2 = *fa::alpha_bound(2.0, 0.02, 5.0).value;
  const fa::BoundReport r = fa::tail_estimate(parts, 10.0);
  EXPECT_LE(fa_test::rel_diff(*r.value, std::exp(100 * a1 + 50 * a2 - 50.0)), 1e-14);
}

TEST(GaussianTailBound, EqualsGaussianChernoffClosedForm) {
  // S_k ~ N(A, 2A) with A = k / (2 sigma^2): Chernoff gives e^{-(L-A)^2/(4A)}.
  for (std::uint64_t k : {1u, 10u, 100u}) {
    const double A = k / (2 * 1.5 * 1.5);
    for (double L : {30.0, 60.0, 80.0}) {
      if (L <= A) continue;
      const double expected = std::exp(-(L - A) * (L - A) / (4 * A));
      EXPECT_LE(fa_test::rel_diff(*fa::gaussian_tail_bound(1.5, k, L).value, expected), 1e-12);
      // And it is an upper bound on the exact tail.
      EXPECT_GE(*fa::gaussian_tail_bound(1.5, k, L).value,
                fa_test::Phi(-(L - A) / std::sqrt(2 * A)));
    }
  }
  EXPECT_EQ(*fa::gaussian_tail_bound(1.5, 100, 10.0).value, 1.0);  // L below the mean
}

TEST(AnalyticTailBound, LambdaThresholdAtSigmaFour) {
  // The stated example: conditions hold up to lambda ~ 14.3.
  const double lambda_max = fa::analytic_bound_lambda_max(4.0, 0.01);
  EXPECT_NEAR(lambda_max, 14.3, 0.2);
  EXPECT_TRUE(fa::analytic_tail_bound(4.0, 0.01, 100, 2 * (lambda_max - 0.01)).valid);
  EXPECT_FALSE(fa::analytic_tail_bound(4.0, 0.01, 100, 2 * (lambda_max + 0.01)).valid);
}

TEST(AnalyticTailBound, GateOnSigmaAndQ) {
  const fa::BoundReport low_sigma = fa::analytic_tail_bound(3.9, 0.01, 100, 10.0);
  EXPECT_FALSE(low_sigma.valid);
  EXPECT_FALSE(low_sigma.value);
  EXPECT_FALSE(fa::analytic_tail_bound(5.0, 0.25, 100, 10.0).valid);
  EXPECT_FALSE(fa::analytic_tail_bound(5.0, 0.01, 100, 2.0).valid);  // lambda = 1
  EXPECT_EQ(fa::analytic_bound_lambda_max(3.9, 0.01), 0.0);
}

TEST(AnalyticTailBound, ClosedForm) {
  const fa::BoundReport r = fa::analytic_tail_bound(4.0, 0.01, 1000, 20.0);
  ASSERT_TRUE(r.valid);
  const double expected = std::pow(1 + 2 * 1e-4 * 11 * 10 / 16.0, 1000) * std::exp(-200.0);
  EXPECT_LE(fa_test::rel_diff(*r.value, expected), 1e-12);
}

TEST(AnalyticTailBound, BoundsSingleMechanismTail) {
  // Riemann tail of omega on a grid reaching well past L.
  const fa::PldDensity omega(fa::MechanismSpec::poisson(4.0, 0.01));
  const fa::Grid wide(40.0, 800000);
  for (double L : {2.5, 4.0, 10.0, 20.0}) {
    double tail = 0.0;
    for (std::size_t i = 0; i < wide.n(); ++i) {
      if (wide.x(i) > L) tail += omega(wide.x(i));
    }
    tail *= wide.dx();
    const fa::BoundReport r = fa::analytic_tail_bound(4.0, 0.01, 1, L);
    ASSERT_TRUE(r.valid) << "L=" << L;
    EXPECT_GE(*r.value, tail) << "L=" << L;
  }
}

TEST(AnalyticTailBound, MonotoneInLAndK) {
  double prev = INFINITY;
  for (double L = 2.5; L <= 28.0; L += 0.5) {
    const fa::BoundReport r = fa::analytic_tail_bound(4.0, 0.01, 10000, L);
    ASSERT_TRUE(r.valid) << "L=" << L;
    EXPECT_LT(*r.value, prev);
    prev = *r.value;
  }
  prev = 0.0;
  for (std::uint64_t k = 1; k <= 1u << 20; k *= 2) {
    const double v = *fa::analytic_tail_bound(4.0, 0.01, k, 10.0).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(PeriodisationBound, FirstTermIsNegligibleAtLFour) {
  const fa::PeriodisationBound b = fa::periodisation_bound(2.0, 0.01, 20000, 4.0);
  EXPECT_LE(b.truncation_term, 1e-16);
  EXPECT_GT(b.truncation_term, 0.0);
}

TEST(PeriodisationBound, SmallerThanTailEstimate) {
  const fa::PeriodisationBound b = fa::periodisation_bound(2.0, 0.01, 10000, 12.0);
  ASSERT_TRUE(b.report.value);
  EXPECT_LT(*b.report.value, *fa::tail_estimate(2.0, 0.01, 10000, 12.0).value);
}

TEST(PeriodisationBound, DecreasesInL) {
  double prev = INFINITY;
  for (double L = 1.0; L <= 30.0; L += 1.0) {
    const fa::PeriodisationBound b = fa::periodisation_bound(2.0, 0.01, 10000, L);
    ASSERT_TRUE(b.report.value) << "L=" << L;
    EXPECT_LT(*b.report.value, prev) << "L=" << L;
    prev = *b.report.value;
  }
}

TEST(PeriodisationBound, SeriesStopsEarly) {
  const fa::PeriodisationBound b = fa::periodisation_bound(2.0, 0.01, 10000, 12.0);
  EXPECT_GE(b.series_terms, 1u);
  EXPECT_LE(b.series_terms, 64u);
  EXPECT_DOUBLE_EQ(*b.report.value, b.truncation_term + b.tail_term + b.series);
}

TEST(PeriodisationBound, PreconditionsAndCustomAlpha) {
  EXPECT_FALSE(fa::periodisation_bound(2.0, 0.6, 10, 12.0).report.valid);
  EXPECT_FALSE(fa::periodisation_bound(2.0, 0.01, 10, 0.5).report.valid);
  // A pluggable alpha; zero moments make the tail term exactly e^{-L^2/2}.
  const fa::PeriodisationBound b = fa::periodisation_bound(
      2.0, 0.01, 10, 3.0, [](double) { return fa::BoundReport{0.0, true, {}}; });
  EXPECT_DOUBLE_EQ(b.tail_term, std::exp(-4.5));
  EXPECT_TRUE(b.report.valid);
}

TEST(RichardsonEstimate, ZeroForEqualInputs) {
  EXPECT_EQ(fa::richardson_estimate(0.25, 0.25), 0.0);
  EXPECT_DOUBLE_EQ(fa::richardson_estimate(1.0, 1.5), 1.0);
}

}  // namespace
