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


#include "fourier_accountant/mechanisms.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fourier_accountant/discretization.hpp"
#include "test_support.hpp"

namespace fa = fourier_accountant;
using fa::Direction;
using fa::MechanismSpec;
using fa::PldDensity;

namespace {

// Riemann mass dx * sum omega(x_i) on the lattice of Grid(L, n).
double lattice_mass(const PldDensity& omega, double L, std::size_t n) {
  const fa::Grid grid(L, n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += omega(grid.x(i));
  return grid.dx() * sum;
}

// --- Poisson ---------------------------------------------------------------

TEST(PoissonInverse, ValueAtZeroIsOneHalf) {
  EXPECT_DOUBLE_EQ(fa::loss_inverse_poisson(MechanismSpec::poisson(2.0, 0.3), 0.0), 0.5);
}

TEST(PoissonInverse, FullSamplingIsAffine) {
  const MechanismSpec spec = MechanismSpec::poisson(1.5, 1.0);
  EXPECT_DOUBLE_EQ(fa::loss_inverse_poisson(spec, 2.0), 5.0);
  EXPECT_DOUBLE_EQ(fa::loss_inverse_poisson(spec, -3.0), 1.5 * 1.5 * -3.0 + 0.5);
}

TEST(PoissonInverse, ForwardEvaluationRecoversS) {
  const MechanismSpec spec = MechanismSpec::poisson(1.5, 0.01);
  const double t = fa::loss_inverse_poisson(spec, 1.0);
  // Forward map written out independently of the library's helpers.
  const double q = 0.01, sigma = 1.5;
  const double forward = std::log(q * std::exp((2 * t - 1) / (2 * sigma * sigma)) + 1 - q);
  EXPECT_NEAR(forward, 1.0, 1e-12);
}

TEST(PoissonInverse, OutsideRangeIsADomainError) {
  const MechanismSpec spec = MechanismSpec::poisson(1.5, 0.01);
  EXPECT_THROW(fa::loss_inverse_poisson(spec, std::log(0.99)), fa::DomainError);
  EXPECT_THROW(fa::loss_inverse_poisson(spec, -1.0), fa::DomainError);
  EXPECT_NO_THROW(fa::loss_inverse_poisson(spec, std::log(0.99) + 1e-9));
}

TEST(PoissonDensity, ZeroBelowSupport) {
  const MechanismSpec spec = MechanismSpec::poisson(1.5, 0.01);
  EXPECT_EQ(fa::pld_density_poisson(spec, std::log(0.99) - 0.1), 0.0);
  EXPECT_EQ(fa::pld_density_poisson(spec, std::log1p(-0.01)), 0.0);
  EXPECT_EQ(fa::pld_density_poisson(spec, -5.0), 0.0);
}

TEST(PoissonDensity, YOverXVanishesAboveMirroredSupport) {
  const MechanismSpec spec = MechanismSpec::poisson(1.5, 0.01, Direction::kYOverX);
  EXPECT_EQ(fa::pld_density_poisson(spec, -std::log1p(-0.01)), 0.0);
  EXPECT_EQ(fa::pld_density_poisson(spec, 0.5), 0.0);
  EXPECT_GT(fa::pld_density_poisson(spec, 0.0), 0.0);
}

TEST(PoissonDensity, NormalisedOnTableGrid) {
  const PldDensity omega(MechanismSpec::poisson(1.5, 0.01));
  EXPECT_NEAR(lattice_mass(omega, 12.0, 1000000), 1.0, 1e-8);
}

TEST(PoissonDensity, DualRelationAtPointTwo) {
  const PldDensity xy(MechanismSpec::poisson(1.5, 0.01, Direction::kXOverY));
  const PldDensity yx(MechanismSpec::poisson(1.5, 0.01, Direction::kYOverX));
  EXPECT_LE(fa_test::rel_diff(xy(0.2), std::exp(0.2) * yx(-0.2)), 1e-12);
}

// Density as the derivative of the loss CDF, by central differences.
// X/Y: P[L(T) <= s] = F_X(L^{-1}(s)). Y/X: P[-L(T) <= s] = 1 - F_Y(L^{-1}(-s)).
double poisson_cdf_density(double sigma, double q, Direction d, double s) {
  auto inv = [&](double v) {
    return sigma * sigma * std::log((std::exp(v) - (1 - q)) / q) + 0.5;
  };
  auto F = [&](double v) {
    if (d == Direction::kXOverY) {
      const double t = inv(v);
      return q * fa_test::Phi((t - 1) / sigma) + (1 - q) * fa_test::Phi(t / sigma);
    }
    return 1.0 - fa_test::Phi(inv(-v) / sigma);
  };
  const double h = 1e-5;
  return (F(s + h) - F(s - h)) / (2 * h);
}

TEST(PoissonDensity, MatchesDerivativeOfLossCdf) {
  for (Direction d : {Direction::kXOverY, Direction::kYOverX}) {
    const PldDensity omega(MechanismSpec::poisson(1.5, 0.1, d));
    for (double s : {-0.08, -0.02, 0.0, 0.05, 0.09}) {
      const double expected = poisson_cdf_density(1.5, 0.1, d, s);
      EXPECT_LE(fa_test::rel_diff(omega(s), expected), 1e-6)
          << "direction " << fa::to_string(d) << " s=" << s;
    }
  }
}

// --- Without replacement ---------------------------------------------------

TEST(WithoutReplacementInverse, ZeroMapsToZero) {
  const MechanismSpec spec = MechanismSpec::without_replacement(2.0, 0.1);
  EXPECT_EQ(fa::without_replacement_loss_inverse(spec, 0.0), 0.0);
}

TEST(WithoutReplacementDensity, NormalisedOnWideGrid) {
  const PldDensity omega(MechanismSpec::without_replacement(2.0, 0.1));
  EXPECT_NEAR(lattice_mass(omega, 15.0, 1000000), 1.0, 1e-8);
}

TEST(WithoutReplacementDensity, SelfDualAtPointThree) {
  const MechanismSpec spec = MechanismSpec::without_replacement(2.0, 0.1);
  EXPECT_LE(fa_test::rel_diff(fa::pld_density_without_replacement(spec, 0.3),
                              std::exp(0.3) * fa::pld_density_without_replacement(spec, -0.3)),
            1e-12);
}

TEST(WithoutReplacementDensity, MatchesDerivativeOfLossCdf) {
  const double sigma = 2.0, q = 0.1;
  const MechanismSpec spec = MechanismSpec::without_replacement(sigma, q);
  auto F = [&](double s) {
    const double t = fa::without_replacement_loss_inverse(spec, s);
    return q * fa_test::Phi((t - 1) / sigma) + (1 - q) * fa_test::Phi(t / sigma);
  };
  for (double s : {-0.1, -0.03, 0.0, 0.04, 0.12}) {
    const double h = 1e-5;
    const double expected = (F(s + h) - F(s - h)) / (2 * h);
    EXPECT_LE(fa_test::rel_diff(fa::pld_density_without_replacement(spec, s), expected), 1e-6)
        << "s=" << s;
  }
}

TEST(WithoutReplacementInverse, SatisfiesQuadratic) {
  // c x^2 + (1 - q)(1 - e^s) x - c e^s = 0 with x = e^{t / sigma^2}.
  const double sigma = 2.0, q = 0.1;
  const MechanismSpec spec = MechanismSpec::without_replacement(sigma, q);
  const double c = q * std::exp(-1 / (2 * sigma * sigma));
  for (double s : {-2.0, -0.5, 0.3, 1.7}) {
    const double x = std::exp(fa::without_replacement_loss_inverse(spec, s) / (sigma * sigma));
    const double residual = c * x * x + (1 - q) * (1 - std::exp(s)) * x - c * std::exp(s);
    EXPECT_NEAR(residual, 0.0, 1e-13) << "s=" << s;
  }
}

// --- With replacement ------------------------------------------------------

TEST(WithReplacementInverse, ZeroMapsToZero) {
  EXPECT_EQ(fa::with_replacement_loss_inverse(MechanismSpec::with_replacement(2.0, 5, 100), 0.0),
            0.0);
}

TEST(WithReplacementDensity, SingleDrawEqualsWithoutReplacement) {
  const MechanismSpec wr = MechanismSpec::with_replacement(2.0, 1, 100);
  const MechanismSpec wor = MechanismSpec::without_replacement(2.0, 0.01);
  const PldDensity a(wr);
  for (double s : {-1.0, -0.2, -0.01, 0.0, 0.003, 0.05, 0.4, 2.5}) {
    EXPECT_LE(fa_test::rel_diff(a(s), fa::pld_density_without_replacement(wor, s)), 1e-10)
        << "s=" << s;
    EXPECT_NEAR(a.loss_inverse(s), fa::without_replacement_loss_inverse(wor, s), 1e-10);
  }
}

TEST(WithReplacementDensity, NormalisedOnWideGrid) {
  const PldDensity omega(MechanismSpec::with_replacement(2.0, 5, 100));
  EXPECT_NEAR(lattice_mass(omega, 20.0, 1000000), 1.0, 1e-7);
}

TEST(WithReplacementDensity, MatchesDerivativeOfLossCdf) {
  // F_X(t) = sum_l Binom(m, 1/n)(l) Phi((t - l) / sigma).
  const double sigma = 2.0;
  const int m = 5;
  const double p = 0.01;
  const MechanismSpec spec = MechanismSpec::with_replacement(sigma, m, 100);
  const PldDensity omega(spec);
  auto F = [&](double s) {
    const double t = omega.loss_inverse(s);
    double acc = 0.0;
    double binom = 1.0;
    for (int l = 0; l <= m; ++l) {
      if (l > 0) binom *= static_cast<double>(m - l + 1) / l;
      acc += binom * std::pow(p, l) * std::pow(1 - p, m - l) * fa_test::Phi((t - l) / sigma);
    }
    return acc;
  };
  for (double s : {-0.2, -0.05, 0.0, 0.07, 0.3}) {
    const double h = 1e-5;
    const double expected = (F(s + h) - F(s - h)) / (2 * h);
    EXPECT_LE(fa_test::rel_diff(omega(s), expected), 1e-6) << "s=" << s;
  }
}

TEST(WithReplacementLoss, LargeBatchStaysFinite) {
  // C(m, l) overflows a double long before m = 5000.
  const PldDensity omega(MechanismSpec::with_replacement(1.0, 5000, 60000));
  for (double s : {-3.0, -0.1, 0.0, 0.1, 3.0}) {
    const double v = omega(s);
    EXPECT_TRUE(std::isfinite(v)) << "s=" << s;
    EXPECT_GT(v, 0.0) << "s=" << s;
    EXPECT_NEAR(omega.loss(omega.loss_inverse(s)), s, 1e-10);
  }
}

// --- Properties over all schemes -------------------------------------------

struct SchemeCase {
  const char* name;
  MechanismSpec spec;
  double lo, hi;  // sampling range for s
};

std::vector<SchemeCase> scheme_cases() {
  return {
      {"poisson_xy", MechanismSpec::poisson(1.5, 0.01, Direction::kXOverY), std::log(0.99) + 1e-6, 6.0},
      {"poisson_yx", MechanismSpec::poisson(1.5, 0.01, Direction::kYOverX), -6.0, -std::log(0.99) - 1e-6},
      {"poisson_half", MechanismSpec::poisson(0.8, 0.5), std::log(0.5) + 1e-6, 8.0},
      {"without_replacement", MechanismSpec::without_replacement(2.0, 0.1), -6.0, 6.0},
      {"with_replacement", MechanismSpec::with_replacement(2.0, 5, 100), -6.0, 6.0},
      {"with_replacement_big", MechanismSpec::with_replacement(1.2, 256, 10000), -6.0, 6.0},
  };
}

class SchemeProperties : public ::testing::TestWithParam<SchemeCase> {};

TEST_P(SchemeProperties, RoundTrip) {
  const SchemeCase& c = GetParam();
  const PldDensity omega(c.spec);
  auto gen = fa_test::rng();
  std::uniform_real_distribution<double> u(c.lo, c.hi);
  for (int i = 0; i < 1000; ++i) {
    const double s = u(gen);
    EXPECT_NEAR(omega.loss(omega.loss_inverse(s)), s, 1e-10) << "s=" << s;
  }
}

TEST_P(SchemeProperties, InverseIsStrictlyMonotone) {
  const SchemeCase& c = GetParam();
  const PldDensity omega(c.spec);
  auto gen = fa_test::rng(7);
  std::uniform_real_distribution<double> u(c.lo, c.hi);
  std::vector<double> s(1000);
  for (double& v : s) v = u(gen);
  std::sort(s.begin(), s.end());
  // Increasing for every scheme except the Poisson Y/X loss, which is the
  // negated X/Y loss and so has a decreasing inverse.
  const bool decreasing = c.spec.scheme == fa::Scheme::kPoissonRemoveAdd &&
                          c.spec.direction == Direction::kYOverX;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] == s[i - 1]) continue;
    const double a = omega.loss_inverse(s[i - 1]);
    const double b = omega.loss_inverse(s[i]);
    if (decreasing) {
      EXPECT_GT(a, b) << "s=" << s[i];
    } else {
      EXPECT_LT(a, b) << "s=" << s[i];
    }
  }
}

TEST_P(SchemeProperties, NonNegative) {
  const SchemeCase& c = GetParam();
  const PldDensity omega(c.spec);
  for (double s = -20.0; s <= 20.0; s += 0.01) {
    const double v = omega(s);
    EXPECT_TRUE(std::isfinite(v) && v >= 0.0) << "s=" << s << " omega=" << v;
  }
}

INSTANTIATE_TEST_SUITE_P(AllSchemes, SchemeProperties, ::testing::ValuesIn(scheme_cases()),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(DualRelation, PoissonPointwise) {
  for (double q : {0.01, 0.2}) {
    const PldDensity xy(MechanismSpec::poisson(1.5, q, Direction::kXOverY));
    const PldDensity yx(MechanismSpec::poisson(1.5, q, Direction::kYOverX));
    auto gen = fa_test::rng(11);
    std::uniform_real_distribution<double> u(std::log1p(-q) * 0.999, 8.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double s = u(gen);
      worst = std::max(worst, fa_test::rel_diff(xy(s), std::exp(s) * yx(-s)));
    }
    EXPECT_LE(worst, 1e-12) << "q=" << q;
  }
}

TEST(DualRelation, SubstituteSchemesAreSelfDual) {
  for (const MechanismSpec& spec : {MechanismSpec::without_replacement(2.0, 0.1),
                                    MechanismSpec::with_replacement(2.0, 5, 100),
                                    MechanismSpec::with_replacement(1.2, 256, 10000)}) {
    const PldDensity omega(spec);
    auto gen = fa_test::rng(13);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double s = u(gen);
      worst = std::max(worst, fa_test::rel_diff(omega(s), std::exp(s) * omega(-s)));
    }
    EXPECT_LE(worst, 1e-12) << fa::to_string(spec.scheme);
  }
}

// --- Spec validation -------------------------------------------------------

TEST(MechanismSpec, RejectsInvalidParameters) {
  EXPECT_THROW(MechanismSpec::poisson(0.0, 0.1).validate(), fa::DomainError);
  EXPECT_THROW(MechanismSpec::poisson(-1.0, 0.1).validate(), fa::DomainError);
  EXPECT_THROW(MechanismSpec::poisson(1.0, 0.0).validate(), fa::DomainError);
  EXPECT_THROW(MechanismSpec::poisson(1.0, 1.5).validate(), fa::DomainError);
  EXPECT_THROW(MechanismSpec::without_replacement(1.0, -0.1).validate(), fa::DomainError);
  EXPECT_THROW(MechanismSpec::with_replacement(1.0, 0, 10).validate(), fa::DomainError);
  EXPECT_THROW(MechanismSpec::with_replacement(1.0, 11, 10).validate(), fa::DomainError);
  EXPECT_NO_THROW(MechanismSpec::poisson(1.0, 1.0).validate());
  EXPECT_NO_THROW(MechanismSpec::with_replacement(1.0, 10, 10).validate());
}

TEST(MechanismSpec, PldDensityValidatesOnConstruction) {
  EXPECT_THROW(PldDensity(MechanismSpec::poisson(1.0, 2.0)), fa::DomainError);
}

TEST(MechanismSpec, SelfDualFlags) {
  EXPECT_FALSE(MechanismSpec::poisson(1.0, 0.1).self_dual());
  EXPECT_TRUE(MechanismSpec::without_replacement(1.0, 0.1).self_dual());
  EXPECT_TRUE(MechanismSpec::with_replacement(1.0, 2, 10).self_dual());
}

}  // namespace
