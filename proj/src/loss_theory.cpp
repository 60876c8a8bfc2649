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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lossbench/special.hpp"

namespace lossbench {

namespace {

constexpr double kBisectionWidth = 1e-12;
constexpr double kBracketLow = 1e-6;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double dice_variance(double length, double sigma) {
  if (sigma == 0.0) return 1.0 / (length * length);
  return erf(length / (std::numbers::sqrt2 * sigma)) / (length * length);
}

void require_length(double length) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("object length must be positive and finite");
  }
}

}  // namespace

LossKind LossKind::smooth_l1(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("smoothl1 beta must be positive");
  }
  return LossKind(LossFamily::kSmoothL1, beta);
}

LossKind LossKind::dice(double length) {
  require_length(length);
  return LossKind(LossFamily::kDice, length);
}

LossKind LossKind::parse(std::string_view name, double parameter) {
  if (name == "l1") return l1();
  if (name == "l2") return l2();
  if (name == "smoothl1") return smooth_l1(parameter);
  if (name == "dice") return dice(parameter);
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

std::string LossKind::name() const {
  switch (family_) {
    case LossFamily::kL1: return "l1";
    case LossFamily::kL2: return "l2";
    case LossFamily::kSmoothL1: return "smoothl1";
    case LossFamily::kDice: return "dice";
  }
  return "unknown";
}

NoiseModel::NoiseModel(double sigma_in) : sigma(sigma_in) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("noise sigma must be finite and >= 0");
  }
}

double loss_value(const LossKind& kind, double eta) {
  const double a = std::abs(eta);
  const double p = kind.parameter();
  switch (kind.family()) {
    case LossFamily::kL1: return a;
    case LossFamily::kL2: return 0.5 * eta * eta;
    case LossFamily::kSmoothL1:
      // Huber form, so that the derivative is the residual clipped to beta.
      return a <= p ? 0.5 * eta * eta : p * (a - 0.5 * p);
    case LossFamily::kDice: return a <= p ? a / p : 1.0;
  }
  return 0.0;
}

double loss_gradient(const LossKind& kind, double eta) {
  const double p = kind.parameter();
  switch (kind.family()) {
    case LossFamily::kL1: return sign(eta);
    case LossFamily::kL2: return eta;
    case LossFamily::kSmoothL1: return std::clamp(eta, -p, p);
    case LossFamily::kDice: return std::abs(eta) <= p ? sign(eta) / p : 0.0;
  }
  return 0.0;
}

std::optional<double> closed_form_variance(const LossKind& kind,
                                           const NoiseModel& noise) {
  switch (kind.family()) {
    case LossFamily::kL1: return 1.0;
    case LossFamily::kL2: return noise.sigma * noise.sigma;
    case LossFamily::kSmoothL1: return std::nullopt;
    case LossFamily::kDice:
      return dice_variance(kind.parameter(), noise.sigma);
  }
  return std::nullopt;
}

SigmaMSolution solve_sigma_m(double length) {
  require_length(length);
  // Strictly increasing in sigma: sigma^2 grows, the dice variance decays.
  auto residual = [length](double s) {
    return s * s - dice_variance(length, s);
  };
  double lo = kBracketLow;
  double hi = std::max(1.0, 2.0 / length);
  int iterations = 0;
  while (hi - lo > kBisectionWidth) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (residual(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++iterations;
  }
  const double root = 0.5 * (lo + hi);
  return {root, residual(root), iterations};
}

ThresholdResult sigma_c(double length) {
  const SigmaMSolution m = solve_sigma_m(length);
  const double l2 = length * length;
  const double sigma_l1 =
      l2 < 1.0 ? std::numbers::sqrt2 / length * erf_inv(l2) : 0.0;
  return {m.root, sigma_l1, std::max(m.root, sigma_l1),
          length, m.residual, m.iterations};
}

}  // namespace lossbench
