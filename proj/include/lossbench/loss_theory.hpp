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

#ifndef LOSSBENCH_LOSS_THEORY_HPP_
#define LOSSBENCH_LOSS_THEORY_HPP_

#include <optional>
#include <string>
#include <string_view>

namespace lossbench {

enum class LossFamily { kL1, kL2, kSmoothL1, kDice };

/// A member of the loss family together with its parameter.
///
/// SmoothL1 carries its transition point beta; Dice carries the object
/// length along the ray. Both parameters are in meters and strictly positive.
class LossKind {
 public:
  static LossKind l1() { return LossKind(LossFamily::kL1, 0.0); }
  static LossKind l2() { return LossKind(LossFamily::kL2, 0.0); }
  static LossKind smooth_l1(double beta);
  static LossKind dice(double length);

  /// Parses "l1", "l2", "smoothl1" or "dice". The parameter argument is
  /// used as beta or length respectively and ignored otherwise.
  static LossKind parse(std::string_view name, double parameter);

  LossFamily family() const { return family_; }
  /// beta for SmoothL1, length for Dice, 0 otherwise.
  double parameter() const { return parameter_; }
  std::string name() const;

  friend bool operator==(const LossKind&, const LossKind&) = default;

 private:
  LossKind(LossFamily family, double parameter)
      : family_(family), parameter_(parameter) {}

  LossFamily family_;
  double parameter_;
};

/// Additive depth noise eta ~ N(0, sigma^2).
struct NoiseModel {
  explicit NoiseModel(double sigma);
  double sigma;
};

/// Loss as a function of the depth residual eta.
double loss_value(const LossKind& kind, double eta);

/// d loss / d eta. Sign-based losses return 0 at eta == 0; Dice returns the
/// interior value at |eta| == length.
double loss_gradient(const LossKind& kind, double eta);

/// Closed-form Var(d loss / d eta) under Gaussian noise. Empty for SmoothL1.
/// Dice at sigma == 0 returns the limit 1 / length^2.
std::optional<double> closed_form_variance(const LossKind& kind,
                                           const NoiseModel& noise);

struct SigmaMSolution {
  double root;
  double residual;
  int iterations;
};

/// Bisection for the positive root of sigma^2 = erf(l / (sqrt(2) sigma)) / l^2.
SigmaMSolution solve_sigma_m(double length);
inline double sigma_m(double length) { return solve_sigma_m(length).root; }

struct ThresholdResult {
  double sigma_m;
  double sigma_l1;
  double sigma_c;
  double length;
  double solver_residual;
  int iterations;
};

/// Critical noise threshold above which dice beats both L1 and L2.
/// sigma_l1 is 0 when length^2 >= 1 (the L1 comparison holds for all sigma).
ThresholdResult sigma_c(double length);

}  // namespace lossbench

#endif  // LOSSBENCH_LOSS_THEORY_HPP_
