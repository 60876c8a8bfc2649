// Copyright 2026 The lossbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lossbench/loss_theory.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "gtest/gtest.h"
#include "lossbench/sgd_lab.hpp"
#include "lossbench/special.hpp"

namespace lossbench {
namespace {

TEST(LossKindTest, RejectsNonPositiveParameters) {
  EXPECT_THROW(LossKind::dice(0.0), std::invalid_argument);
  EXPECT_THROW(LossKind::dice(-3.0), std::invalid_argument);
  EXPECT_THROW(LossKind::smooth_l1(0.0), std::invalid_argument);
  EXPECT_THROW(LossKind::parse("ce", 1.0), std::invalid_argument);
  EXPECT_THROW(NoiseModel(-0.1), std::invalid_argument);
  EXPECT_EQ(LossKind::parse("dice", 4.0), LossKind::dice(4.0));
  EXPECT_EQ(LossKind::parse("l1", 99.0).name(), "l1");
}

TEST(LossValueTest, Examples) {
  EXPECT_DOUBLE_EQ(loss_value(LossKind::dice(2.0), 0.5), 0.25);
  EXPECT_DOUBLE_EQ(loss_value(LossKind::dice(2.0), 3.0), 1.0);
  EXPECT_DOUBLE_EQ(loss_value(LossKind::dice(2.0), -2.0), 1.0);
  EXPECT_DOUBLE_EQ(loss_value(LossKind::l2(), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(loss_value(LossKind::l2(), -3.0), 4.5);
  EXPECT_DOUBLE_EQ(loss_value(LossKind::l1(), -3.0), 3.0);
  EXPECT_DOUBLE_EQ(loss_value(LossKind::smooth_l1(1.0), 0.5), 0.125);
  EXPECT_DOUBLE_EQ(loss_value(LossKind::smooth_l1(1.0), 3.0), 2.5);
}

TEST(LossGradientTest, Examples) {
  EXPECT_EQ(loss_gradient(LossKind::l1(), -2.0), -1.0);
  EXPECT_EQ(loss_gradient(LossKind::dice(2.0), 0.5), 0.5);
  EXPECT_EQ(loss_gradient(LossKind::dice(2.0), 5.0), 0.0);
  EXPECT_EQ(loss_gradient(LossKind::l2(), -1.5), -1.5);
  EXPECT_EQ(loss_gradient(LossKind::smooth_l1(0.5), 2.0), 0.5);
  EXPECT_EQ(loss_gradient(LossKind::smooth_l1(0.5), -0.2), -0.2);
}

TEST(LossGradientTest, KinkConventions) {
  EXPECT_EQ(loss_gradient(LossKind::l1(), 0.0), 0.0);
  EXPECT_EQ(loss_gradient(LossKind::dice(3.0), 0.0), 0.0);
  EXPECT_EQ(loss_gradient(LossKind::dice(3.0), 3.0), 1.0 / 3.0);
  EXPECT_EQ(loss_gradient(LossKind::dice(3.0), -3.0), -1.0 / 3.0);
}

// Property: gradient equals the central finite difference away from kinks.
TEST(LossGradientTest, MatchesFiniteDifferences) {
  std::mt19937_64 gen(20240613);
  std::uniform_real_distribution<double> eta_dist(-6.0, 6.0);
  const LossKind kinds[] = {LossKind::l1(), LossKind::l2(),
                            LossKind::smooth_l1(0.7), LossKind::dice(2.5)};
  const double h = 1e-6;
  for (const LossKind& kind : kinds) {
    int checked = 0;
    while (checked < 1000) {
      const double eta = eta_dist(gen);
      const double p = kind.parameter();
      if (std::abs(eta) < 1e-3) continue;
      if (p > 0.0 && std::abs(std::abs(eta) - p) < 1e-3) continue;
      const double fd =
          (loss_value(kind, eta + h) - loss_value(kind, eta - h)) / (2 * h);
      ASSERT_NEAR(loss_gradient(kind, eta), fd, 1e-6)
          << kind.name() << " eta=" << eta;
      ++checked;
    }
  }
}

TEST(ClosedFormVarianceTest, Examples) {
  EXPECT_EQ(*closed_form_variance(LossKind::l1(), NoiseModel(7.3)), 1.0);
  EXPECT_DOUBLE_EQ(*closed_form_variance(LossKind::l2(), NoiseModel(0.5)), 0.25);
  EXPECT_NEAR(*closed_form_variance(LossKind::dice(1.0),
                                    NoiseModel(1.0 / std::numbers::sqrt2)),
              0.842700793, 1e-9);
  EXPECT_FALSE(closed_form_variance(LossKind::smooth_l1(1.0), NoiseModel(1.0)));
  EXPECT_NEAR(*closed_form_variance(LossKind::dice(12.0), NoiseModel(0.5)),
              0.0069444444444444444444, 1e-15);
}

TEST(ClosedFormVarianceTest, DiceLimits) {
  const LossKind dice = LossKind::dice(4.0);
  EXPECT_EQ(*closed_form_variance(dice, NoiseModel(0.0)), 1.0 / 16.0);
  EXPECT_NEAR(*closed_form_variance(dice, NoiseModel(1e-4)), 1.0 / 16.0, 1e-15);
  EXPECT_LT(*closed_form_variance(dice, NoiseModel(1e6)), 1e-6);
}

// Property: dice variance strictly decreases in sigma and in length.
TEST(ClosedFormVarianceTest, DiceMonotoneInSigmaAndLength) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> sigma_dist(0.05, 20.0);
  std::uniform_real_distribution<double> length_dist(0.2, 20.0);
  for (int i = 0; i < 500; ++i) {
    double s1 = sigma_dist(gen), s2 = sigma_dist(gen);
    double l1 = length_dist(gen), l2 = length_dist(gen);
    if (s1 > s2) std::swap(s1, s2);
    if (l1 > l2) std::swap(l1, l2);
    // Below ~1e-16 relative the erf argument saturates in double precision.
    if (l1 / s2 < 8.0) {
      EXPECT_LT(*closed_form_variance(LossKind::dice(l1), NoiseModel(s2)),
                *closed_form_variance(LossKind::dice(l1), NoiseModel(s1)));
    }
    EXPECT_LT(*closed_form_variance(LossKind::dice(l2), NoiseModel(s1)),
              *closed_form_variance(LossKind::dice(l1), NoiseModel(s1)));
  }
}

// Property: Monte Carlo variance of the gradient agrees with the closed form.
TEST(ClosedFormVarianceTest, MatchesMonteCarlo) {
  const struct {
    LossKind kind;
    double sigma;
  } cases[] = {{LossKind::l1(), 1.3},      {LossKind::l2(), 0.7},
               {LossKind::dice(1.0), 0.8}, {LossKind::dice(4.0), 3.0},
               {LossKind::dice(0.5), 2.0}};
  std::uint64_t seed = 100;
  for (const auto& c : cases) {
    const VarianceEstimate mc =
        empirical_gradient_variance(c.kind, c.sigma, 1'000'000, seed++);
    const double closed = *closed_form_variance(c.kind, NoiseModel(c.sigma));
    EXPECT_NEAR(mc.variance, closed, std::max(3.0 * mc.std_error, 1e-12))
        << c.kind.name() << " sigma=" << c.sigma;
  }
}

TEST(SigmaMTest, FrozenRoots) {
  // Bisection in 40-digit arithmetic (tests/oracles/theory_oracles.py).
  EXPECT_NEAR(sigma_m(4.0), 0.25, 0.0005);
  EXPECT_NEAR(sigma_m(4.0), 0.25, 1e-11);
  EXPECT_NEAR(sigma_m(12.0), 0.0833, 0.0005);
  EXPECT_NEAR(sigma_m(12.0), 1.0 / 12.0, 1e-11);
  EXPECT_NEAR(sigma_m(2.0), 0.49998417259943798573, 1e-11);
  EXPECT_NEAR(sigma_m(0.5), 1.1566551419307787217, 1e-11);
  const double root1 = sigma_m(1.0);
  EXPECT_GT(root1, 0.80);
  EXPECT_LT(root1, 0.95);
  EXPECT_NEAR(root1, 0.86680953080792651823, 1e-11);
}

// Property: the returned root satisfies the fixed-point equation.
TEST(SigmaMTest, ResidualIsTiny) {
  for (double length = 0.05; length < 40.0; length *= 1.37) {
    const SigmaMSolution s = solve_sigma_m(length);
    const double residual =
        s.root * s.root -
        erf(length / (std::numbers::sqrt2 * s.root)) / (length * length);
    EXPECT_LE(std::abs(residual), 1e-10) << "length=" << length;
    EXPECT_LE(std::abs(s.residual), 1e-10);
    EXPECT_GT(s.iterations, 0);
  }
}

TEST(SigmaCTest, LargeObjectsUseSigmaM) {
  for (double length : {4.0, 12.0, 1.0}) {
    const ThresholdResult r = sigma_c(length);
    EXPECT_EQ(r.sigma_l1, 0.0);
    EXPECT_EQ(r.sigma_c, r.sigma_m);
    EXPECT_EQ(r.length, length);
  }
}

TEST(SigmaCTest, SmallObjectUsesL1Branch) {
  const ThresholdResult r = sigma_c(0.5);
  EXPECT_NEAR(r.sigma_l1, 0.63727872792875032604, 1e-3);
  EXPECT_NEAR(r.sigma_l1, 0.63727872792875032604, 1e-12);
  EXPECT_EQ(r.sigma_c, std::max(r.sigma_m, r.sigma_l1));
  EXPECT_NEAR(r.sigma_m, 1.1566551419307787217, 1e-11);
}

TEST(SigmaCTest, RejectsInvalidLength) {
  EXPECT_THROW(sigma_c(0.0), std::invalid_argument);
  EXPECT_THROW(sigma_c(-1.0), std::invalid_argument);
  EXPECT_THROW(sigma_c(std::nan("")), std::invalid_argument);
}

}  // namespace
}  // namespace lossbench
