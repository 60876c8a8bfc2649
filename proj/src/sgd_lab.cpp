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

#include "lossbench/sgd_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lossbench/parallel.hpp"
#include "lossbench/random.hpp"

namespace lossbench {

namespace {

// Stream tags; each random quantity has its own stream so that changing one
// (e.g. dim) leaves the others untouched.
constexpr std::uint32_t kTagFeatures = 1;
constexpr std::uint32_t kTagNoise = 2;
constexpr std::uint32_t kTagVariance = 3;

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

double StepSchedule::cumulative_square_sum(std::int64_t steps) const {
  if (kind == Kind::kConstant) {
    return scale * scale * static_cast<double>(steps);
  }
  // Summed smallest-first to keep the tail from being absorbed.
  double sum = 0.0;
  for (std::int64_t j = steps; j >= 1; --j) {
    const double s = step(j);
    sum += s * s;
  }
  return sum;
}

void SgdConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("sigma must be finite and >= 0");
  }
  if (!(schedule.scale > 0.0)) {
    throw std::invalid_argument("step scale must be > 0");
  }
  const auto n = static_cast<std::size_t>(dim);
  if (!w_star.empty() && w_star.size() != n) {
    throw std::invalid_argument("w_star length " +
                                std::to_string(w_star.size()) +
                                " != dim " + std::to_string(dim));
  }
  if (!w_init.empty() && w_init.size() != n) {
    throw std::invalid_argument("w_init length " +
                                std::to_string(w_init.size()) +
                                " != dim " + std::to_string(dim));
  }
}

std::vector<double> SgdConfig::resolved_w_star() const {
  return w_star.empty() ? std::vector<double>(dim, 0.0) : w_star;
}

std::vector<double> SgdConfig::resolved_w_init() const {
  if (!w_init.empty()) return w_init;
  return mode == SgdMode::kIdealized ? resolved_w_star()
                                     : std::vector<double>(dim, 0.0);
}

TrialResult run_trial(const SgdConfig& config, int trial_index) {
  config.validate();
  const std::vector<double> w_star = config.resolved_w_star();
  std::vector<double> w = config.resolved_w_init();
  std::vector<double> h(config.dim);
  const auto trial = static_cast<std::uint32_t>(trial_index);

  for (std::int64_t t = 1; t <= config.steps; ++t) {
    const auto step = static_cast<std::uint32_t>(t);
    CounterRng feature_rng(config.base_seed, trial, step, kTagFeatures);
    for (double& v : h) v = feature_rng.normal();
    CounterRng noise_rng(config.base_seed, trial, step, kTagNoise);
    const double eta = config.sigma * noise_rng.normal();

    double residual = eta;
    if (config.mode == SgdMode::kLiteral) {
      const double target = dot(w_star, h) - eta;
      residual = dot(w, h) - target;
    }
    const double scaled = config.schedule.step(t) *
                          loss_gradient(config.loss, residual);
    for (int k = 0; k < config.dim; ++k) w[k] -= scaled * h[k];
  }

  double deviation_sq = 0.0;
  for (int k = 0; k < config.dim; ++k) {
    const double d = w[k] - w_star[k];
    deviation_sq += d * d;
  }
  return {std::move(w), deviation_sq, trial_index};
}

VarianceEstimate empirical_gradient_variance(const LossKind& kind,
                                             double sigma,
                                             std::int64_t samples,
                                             std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("need >= 2 samples");
  CounterRng rng(seed, 0, 0, kTagVariance);
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const double eps = loss_gradient(kind, sigma * rng.normal());
    const double e2 = eps * eps;
    s1 += eps;
    s2 += e2;
    s3 += e2 * eps;
    s4 += e2 * e2;
  }
  const auto n = static_cast<double>(samples);
  const double mu = s1 / n;
  const double raw2 = s2 / n;
  const double central2 = raw2 - mu * mu;
  const double central4 = s4 / n - 4.0 * mu * s3 / n +
                          6.0 * mu * mu * raw2 - 3.0 * mu * mu * mu * mu;
  const double variance = central2 * n / (n - 1.0);
  // Delta-method spread of the second moment plus the chi-square
  // fluctuation of the subtracted squared mean, which dominates when
  // |eps| is nearly constant (L1, saturated dice).
  const double spread = std::max(0.0, central4 - central2 * central2) / n +
                        2.0 * central2 * central2 / (n * n);
  return {variance, std::sqrt(spread)};
}

EnsembleStats run_ensemble(const SgdConfig& config) {
  config.validate();
  std::vector<double> deviations(config.trials);
  parallel_for(deviations.size(), config.threads, [&](std::size_t i) {
    deviations[i] = run_trial(config, static_cast<int>(i)).deviation_sq;
  });

  double sum = 0.0;
  for (double d : deviations) sum += d;
  const double n = static_cast<double>(config.trials);
  const double mean = sum / n;
  double std_error = 0.0;
  if (config.trials > 1) {
    double ss = 0.0;
    for (double d : deviations) ss += (d - mean) * (d - mean);
    std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  const VarianceEstimate var = empirical_gradient_variance(
      config.loss, config.sigma, config.variance_samples, config.base_seed);
  return {mean, std_error, var.variance, var.std_error, config};
}

ConvergenceFit fit_deviation_line(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) {
    throw std::invalid_argument("fit needs at least two points");
  }
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument(
        "degenerate fit: all variances equal; vary sigma or loss");
  }
  const double c1 = sxy / sxx;
  const double c2 = my - c1 * mx;
  double r_squared = 1.0;
  if (syy > 0.0) {
    r_squared = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  }
  return {c1, c2, r_squared, {points.begin(), points.end()}};
}

std::vector<SweepRow> sweep(std::span<const double> lengths,
                            std::span<const double> sigmas,
                            std::span<const SweepLoss> losses,
                            const SgdConfig& config_template) {
  if (lengths.empty() || sigmas.empty() || losses.empty()) {
    throw std::invalid_argument("sweep axes must be non-empty");
  }
  std::vector<SweepRow> rows;
  rows.reserve(lengths.size() * sigmas.size() * losses.size());
  for (const SweepLoss& spec : losses) {
    for (double length : lengths) {
      for (double sigma : sigmas) {
        LossKind kind = LossKind::l1();
        switch (spec.family) {
          case LossFamily::kL1: kind = LossKind::l1(); break;
          case LossFamily::kL2: kind = LossKind::l2(); break;
          case LossFamily::kSmoothL1:
            kind = LossKind::smooth_l1(spec.beta);
            break;
          case LossFamily::kDice: kind = LossKind::dice(length); break;
        }
        SgdConfig config = config_template;
        config.loss = kind;
        config.sigma = sigma;
        const EnsembleStats stats = run_ensemble(config);
        rows.push_back({kind, length, sigma,
                        closed_form_variance(kind, NoiseModel(sigma)),
                        stats.empirical_grad_variance,
                        stats.grad_variance_std_error,
                        stats.mean_deviation_sq, stats.std_error});
      }
    }
  }
  return rows;
}

}  // namespace lossbench
