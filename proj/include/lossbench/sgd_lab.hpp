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

#ifndef LOSSBENCH_SGD_LAB_HPP_
#define LOSSBENCH_SGD_LAB_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lossbench/loss_theory.hpp"

namespace lossbench {

/// Step sizes s_j for j = 1, 2, ...
struct StepSchedule {
  enum class Kind { kInverseJ, kConstant };

  Kind kind = Kind::kInverseJ;
  double scale = 1.0;

  double step(std::int64_t j) const {
    return kind == Kind::kInverseJ ? scale / static_cast<double>(j) : scale;
  }
  /// s_T = sum_{j=1..T} s_j^2.
  double cumulative_square_sum(std::int64_t steps) const;
};

enum class SgdMode {
  /// g_t = h_t * eps(eta_t) with eta_t i.i.d.; the residual is pure noise.
  kIdealized,
  /// g_t = h_t * eps(w_t . h_t - z_t) with targets z_t = w* . h_t - eta_t.
  kLiteral,
};

struct SgdConfig {
  int dim = 1;
  double sigma = 1.0;
  LossKind loss = LossKind::l2();
  std::int64_t steps = 1000;
  int trials = 1;
  SgdMode mode = SgdMode::kIdealized;
  std::vector<double> w_star;  // empty: zero vector
  std::vector<double> w_init;  // empty: w_star (idealized) or zero (literal)
  StepSchedule schedule;
  std::uint64_t base_seed = 0;
  /// Draws used for the empirical gradient variance in run_ensemble.
  std::int64_t variance_samples = 1'000'000;
  /// Worker threads for trials; 0 = hardware concurrency.
  unsigned threads = 0;

  /// Throws std::invalid_argument on inconsistent fields.
  void validate() const;
  std::vector<double> resolved_w_star() const;
  std::vector<double> resolved_w_init() const;
};

struct TrialResult {
  std::vector<double> final_weight;
  double deviation_sq;
  int trial_index;
};

struct EnsembleStats {
  double mean_deviation_sq;
  double std_error;
  double empirical_grad_variance;
  double grad_variance_std_error;
  SgdConfig config_echo;
};

struct ConvergenceFit {
  double c1;
  double c2;
  double r_squared;
  std::vector<std::pair<double, double>> points;
};

TrialResult run_trial(const SgdConfig& config, int trial_index);
EnsembleStats run_ensemble(const SgdConfig& config);

struct VarianceEstimate {
  double variance;
  double std_error;
};

/// Monte Carlo Var(loss_gradient(eta)) for eta ~ N(0, sigma^2). Draws come
/// from a stream reserved for variance estimation, keyed by seed.
VarianceEstimate empirical_gradient_variance(const LossKind& kind,
                                             double sigma,
                                             std::int64_t samples,
                                             std::uint64_t seed);

/// Least-squares line through (Var(eps), mean deviation) points.
/// Throws std::invalid_argument when fewer than two distinct variances.
ConvergenceFit fit_deviation_line(std::span<const std::pair<double, double>> points);

/// Loss family for a sweep; the dice length comes from the length axis.
struct SweepLoss {
  LossFamily family;
  double beta = 1.0;  // SmoothL1 only
};

struct SweepRow {
  LossKind loss;
  double length;
  double sigma;
  std::optional<double> var_closed;
  double var_empirical;
  double var_std_error;
  double mean_deviation;
  double std_error;
};

/// Cartesian sweep over (loss, length, sigma), rows in that order. Every row
/// runs `config_template` with its loss and sigma substituted, sharing the
/// template seed.
std::vector<SweepRow> sweep(std::span<const double> lengths,
                            std::span<const double> sigmas,
                            std::span<const SweepLoss> losses,
                            const SgdConfig& config_template);

}  // namespace lossbench

#endif  // LOSSBENCH_SGD_LAB_HPP_
