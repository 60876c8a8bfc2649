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

// Acceptance suite: one line per criterion, non-zero exit if any fails.
// Pass criterion ids as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eval_oracle.hpp"
#include "lossbench/bev_geometry.hpp"
#include "lossbench/detection_metrics.hpp"
#include "lossbench/loss_theory.hpp"
#include "lossbench/sgd_lab.hpp"
#include "lossbench/synthetic_bench.hpp"

namespace lossbench {
namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string str(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

// 1. Monte Carlo gradient variance against the closed forms.
Outcome variance_table() {
  struct Case {
    LossKind kind;
    double sigma;
  };
  std::vector<Case> cases{{LossKind::l1(), 1.0}};
  for (double s : {0.25, 1.0, 2.0}) cases.push_back({LossKind::l2(), s});
  for (double l : {4.0, 12.0}) {
    for (double s : {0.1, 0.5, 1.0}) cases.push_back({LossKind::dice(l), s});
  }
  double worst = 0.0;
  std::string worst_case;
  bool pass = true;
  for (const Case& c : cases) {
    const double closed = *closed_form_variance(c.kind, NoiseModel(c.sigma));
    const VarianceEstimate est = empirical_gradient_variance(c.kind, c.sigma, 1'000'000, 0);
    const double tol = std::max(0.01 * closed, 3.0 * est.std_error);
    const double ratio = std::abs(est.variance - closed) / tol;
    pass = pass && ratio <= 1.0;
    if (ratio > worst) {
      worst = ratio;
      worst_case = c.kind.name() + " sigma=" + str(c.sigma);
    }
  }
  return {pass, std::to_string(cases.size()) + " cases, worst |diff|/tol " + str(worst) +
                    " (" + worst_case + ")"};
}

// 2. Noise thresholds from the solver.
Outcome thresholds() {
  const double s4 = sigma_c(4.0).sigma_c;
  const double s12 = sigma_c(12.0).sigma_c;
  const bool pass = std::abs(s4 - 0.25) <= 0.005 && std::abs(s12 - 0.0833) <= 0.002 &&
                    std::abs(s4 - 0.3) <= 0.06 && std::abs(s12 - 0.1) <= 0.06;
  return {pass, "sigma_c(4)=" + str(s4, 6) + " sigma_c(12)=" + str(s12, 6)};
}

// 3. Variance curves over sigma at length 12: dice below L1 everywhere,
// below L2 exactly above sigma_m.
Outcome variance_sweep() {
  const double length = 12.0;
  const double sm = sigma_m(length);
  SgdConfig t;
  t.dim = 1;
  t.steps = 200;
  t.trials = 20;
  t.variance_samples = 200'000;
  const std::vector<double> lengths{length};
  const auto sigmas = linspace(0.05, 2.0, 20);
  const std::vector<SweepLoss> losses{{LossFamily::kL1}, {LossFamily::kL2}, {LossFamily::kDice}};
  const auto rows = sweep(lengths, sigmas, losses, t);
  const std::size_t n = sigmas.size();
  int violations = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const SweepRow& l1 = rows[i];
    const SweepRow& l2 = rows[n + i];
    const SweepRow& dice = rows[2 * n + i];
    const bool above_m = sigmas[i] > sm;
    for (bool closed : {true, false}) {
      const double v1 = closed ? *l1.var_closed : l1.var_empirical;
      const double v2 = closed ? *l2.var_closed : l2.var_empirical;
      const double vd = closed ? *dice.var_closed : dice.var_empirical;
      if (!(vd < v1)) ++violations;
      if (above_m ? !(vd < v2) : !(vd > v2)) ++violations;
    }
  }
  return {violations == 0, "20 sigmas, sigma_m(12)=" + str(sm, 6) + ", " +
                               std::to_string(violations) + " ordering violations"};
}

// 4. Mean deviation is linear in Var(eps) with slope s_T * dim.
Outcome deviation_fit() {
  struct Config {
    LossKind kind;
    double sigma;
  };
  const std::vector<Config> configs{
      {LossKind::l1(), 1.0},      {LossKind::l2(), 0.5},      {LossKind::l2(), 1.0},
      {LossKind::l2(), 1.5},      {LossKind::dice(1.0), 1.0}, {LossKind::dice(4.0), 2.0},
      {LossKind::smooth_l1(1.0), 1.0}};
  std::vector<std::pair<double, double>> points;
  for (const Config& c : configs) {
    SgdConfig s;
    s.dim = 8;
    s.steps = 5000;
    s.trials = 2000;
    s.loss = c.kind;
    s.sigma = c.sigma;
    s.mode = SgdMode::kIdealized;
    const EnsembleStats stats = run_ensemble(s);
    const double var = closed_form_variance(c.kind, NoiseModel(c.sigma))
                           .value_or(stats.empirical_grad_variance);
    points.emplace_back(var, stats.mean_deviation_sq);
  }
  const ConvergenceFit fit = fit_deviation_line(points);
  const double expected = StepSchedule{}.cumulative_square_sum(5000) * 8.0;
  const double rel = std::abs(fit.c1 / expected - 1.0);
  return {fit.r_squared >= 0.98 && rel <= 0.10,
          std::to_string(points.size()) + " configs, r2=" + str(fit.r_squared, 6) + " slope=" +
              str(fit.c1, 6) + " expected=" + str(expected, 6) + " (rel " + str(rel, 3) + ")"};
}

// 5. Dice-trained model beats both regression losses at desk scale.
Outcome dice_advantage() {
  DiceAdvantageConfig c;
  c.lengths = {12.0};
  c.sigma = 0.5;
  c.sgd.dim = 16;
  c.sgd.steps = 5000;
  c.n_seeds = 20;
  c.objects = 10'000;
  const DiceAdvantageReport r = dice_advantage_experiment(c);
  const LengthReport& lr = r.lengths[0];
  const double dice = lr.losses[2].mean_ap50;
  const double best_regression = std::max(lr.losses[0].mean_ap50, lr.losses[1].mean_ap50);
  return {lr.win_rate_both >= 0.95 && dice >= best_regression,
          "win rate vs both " + str(lr.win_rate_both) + ", mean AP50 dice " + str(dice) +
              " l1 " + str(lr.losses[0].mean_ap50) + " l2 " + str(lr.losses[1].mean_ap50)};
}

Box3D strip_box(double z, double length) {
  return Box3D{0.0, 0.0, z, length, 2.0, 1.0, 0.0, "car", std::nullopt};
}

// 6. Rasterized 1D dice against max(0, 1 - |eta| / l).
Outcome grid_consistency() {
  const double length = 12.0, extent = 60.0;
  const BevGrid grid(1, 1000, {-1.0, 1.0, 0.0, extent});
  const double cell = extent / 1000.0;
  const Box3D gt_box[] = {strip_box(30.0, length)};
  const BevGrid gt = rasterize(gt_box, grid);
  double worst = 0.0;
  for (double eta : linspace(-1.5 * length, 1.5 * length, 50)) {
    const Box3D pred[] = {strip_box(30.0 + eta, length)};
    const double d = grid_dice(rasterize(pred, grid), gt);
    worst = std::max(worst, std::abs(d - std::max(0.0, 1.0 - std::abs(eta) / length)));
  }
  const double budget = 2.0 * cell / length;
  return {worst <= budget, "max deviation " + str(worst) + " (budget " + str(budget) + ")"};
}

bool inside(const Box3D& b, double px, double pz) {
  const double dx = px - b.x, dz = pz - b.z;
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  return std::abs(dx * s + dz * c) <= b.l / 2 && std::abs(dx * c - dz * s) <= b.w / 2;
}

double sampled_iou(const Box3D& a, const Box3D& b, std::mt19937_64& gen) {
  double x_lo = 1e300, x_hi = -1e300, z_lo = 1e300, z_hi = -1e300;
  for (const Box3D* bx : {&a, &b}) {
    for (const Vec2& p : bx->footprint()) {
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      z_lo = std::min(z_lo, p.z);
      z_hi = std::max(z_hi, p.z);
    }
  }
  std::uniform_real_distribution<double> ux(x_lo, x_hi), uz(z_lo, z_hi);
  int inter = 0, uni = 0;
  for (int i = 0; i < 100'000; ++i) {
    const double px = ux(gen), pz = uz(gen);
    const bool ia = inside(a, px, pz), ib = inside(b, px, pz);
    inter += ia && ib;
    uni += ia || ib;
  }
  return uni ? static_cast<double>(inter) / uni : 0.0;
}

// 7. Rotated BEV IoU against point sampling, and exact axis-aligned cases.
Outcome rotated_iou() {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), dim(0.5, 6.0),
      yaw(-std::numbers::pi, std::numbers::pi);
  double worst_mc = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Box3D a{pos(gen), 0, pos(gen), dim(gen), dim(gen), 1, yaw(gen), "car", std::nullopt};
    const Box3D b{pos(gen), 0, pos(gen), dim(gen), dim(gen), 1, yaw(gen), "car", std::nullopt};
    worst_mc = std::max(worst_mc, std::abs(bev_iou(a, b) - sampled_iou(a, b, gen)));
  }
  const double quarter[] = {0.0, std::numbers::pi / 2, std::numbers::pi, -std::numbers::pi / 2};
  std::uniform_int_distribution<int> pick(0, 3);
  double worst_exact = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Box3D a{pos(gen), 0, pos(gen), dim(gen), dim(gen), 1, quarter[pick(gen)], "car",
                  std::nullopt};
    const Box3D b{pos(gen), 0, pos(gen), dim(gen), dim(gen), 1, quarter[pick(gen)], "car",
                  std::nullopt};
    // Extents along x and z after a quarter-turn rotation.
    auto span = [](const Box3D& bx, bool along_x) {
      const bool turned = std::abs(std::sin(bx.yaw)) > 0.5;
      return along_x == turned ? bx.l : bx.w;
    };
    auto overlap = [](double c1, double e1, double c2, double e2) {
      return std::max(0.0, std::min(c1 + e1 / 2, c2 + e2 / 2) - std::max(c1 - e1 / 2, c2 - e2 / 2));
    };
    const double inter = overlap(a.x, span(a, true), b.x, span(b, true)) *
                         overlap(a.z, span(a, false), b.z, span(b, false));
    const double expected = inter / (a.l * a.w + b.l * b.w - inter);
    worst_exact = std::max(worst_exact, std::abs(bev_iou(a, b) - expected));
  }
  return {worst_mc <= 0.01 && worst_exact <= 1e-12,
          "max |iou - sampled| " + str(worst_mc) + ", max axis-aligned error " + str(worst_exact)};
}

// 8. evaluate() agrees exactly with the exhaustive evaluator.
Outcome ap_oracle() {
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<int> n_frames(1, 3);
  EvalOptions opt;
  std::size_t entries = 0, mismatches = 0;
  for (int instance = 0; instance < 200; ++instance) {
    std::vector<FrameSet> frames;
    const int n = n_frames(gen);
    for (int k = 0; k < n; ++k) {
      frames.push_back(testing::random_small_frame(gen, 4, 3, std::to_string(k)));
    }
    const ApReport report = evaluate(frames, opt);
    const auto expected = testing::oracle_evaluate(frames, opt);
    if (report.entries.size() != expected.size()) ++mismatches;
    for (const ApEntry& e : report.entries) {
      ++entries;
      const auto it = expected.find({e.category, e.threshold, e.bin});
      if (it == expected.end() || it->second.ap != e.curve.ap ||
          it->second.n_gt != e.n_gt || it->second.n_pred != e.n_pred) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0, "200 instances, " + std::to_string(entries) + " AP entries, " +
                               std::to_string(mismatches) + " mismatches"};
}

bool same_boxes(const std::vector<Box3D>& a, const std::vector<Box3D>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].x != b[i].x || a[i].z != b[i].z || a[i].score != b[i].score ||
        a[i].category != b[i].category) {
      return false;
    }
  }
  return true;
}

// 9. NMS duplicate suppression and idempotence; all-fields oracle swap.
Outcome nms_and_swap() {
  std::mt19937_64 gen(9);
  std::uniform_int_distribution<int> n_gt(1, 6), cat(0, 1);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0), size(1.0, 8.0), unit(0.0, 1.0);
  const char* names[] = {"car", "truck"};
  int dup_fail = 0, idem_fail = 0, swap_fail = 0;
  for (int frame = 0; frame < 100; ++frame) {
    FrameSet f{std::to_string(frame), {}, {}};
    std::vector<Box3D> originals, all;
    const int n = n_gt(gen);
    for (int g = 0; g < n; ++g) {
      // GT centers 12 m apart, so every cluster is isolated.
      const Box3D gt{12.0 * g, 0.0, 20.0 + 3.0 * jitter(gen), size(gen), 2.0, 1.5,
                     0.3 * jitter(gen), names[cat(gen)], std::nullopt};
      f.ground_truths.push_back(gt);
      Box3D p = gt;
      p.x += jitter(gen);
      p.z += jitter(gen);
      p.l *= 1.0 + 0.3 * jitter(gen);
      p.yaw += 0.5 * jitter(gen);
      p.score = 0.5 + 0.5 * unit(gen);
      originals.push_back(p);
      all.push_back(p);
      for (int d = 0; d < 3; ++d) {
        Box3D dup = p;
        dup.x += 0.5 * jitter(gen);
        dup.z += 0.5 * jitter(gen);
        dup.score = *p.score * unit(gen);
        all.push_back(dup);
      }
    }
    std::shuffle(all.begin(), all.end(), gen);
    const auto kept = center_nms(all);
    auto expected = originals;
    std::stable_sort(expected.begin(), expected.end(),
                     [](const Box3D& a, const Box3D& b) { return *a.score > *b.score; });
    if (!same_boxes(kept, expected)) ++dup_fail;
    if (!same_boxes(center_nms(kept), kept)) ++idem_fail;

    f.predictions = kept;
    const std::vector<FrameSet> swapped{oracle_swap(f, kAllBoxFields)};
    const ApReport report = evaluate(swapped);
    for (const ApEntry& e : report.entries) {
      if (e.bin == "all" && e.n_gt > 0 && e.curve.ap != 1.0) ++swap_fail;
    }
  }
  return {dup_fail + idem_fail + swap_fail == 0,
          "100 frames; duplicate-suppression failures " + std::to_string(dup_fail) +
              ", idempotence failures " + std::to_string(idem_fail) +
              ", swap AP != 1 entries " + std::to_string(swap_fail)};
}

}  // namespace
}  // namespace lossbench

int main(int argc, char** argv) {
  using lossbench::Criterion;
  const std::vector<Criterion> criteria{
      {1, "variance table", 10.0, lossbench::variance_table},
      {2, "noise thresholds", 1.0, lossbench::thresholds},
      {3, "variance sweep ordering", 5.0, lossbench::variance_sweep},
      {4, "deviation vs variance fit", 120.0, lossbench::deviation_fit},
      {5, "dice beats regression AP", 300.0, lossbench::dice_advantage},
      {6, "grid dice consistency", 1.0, lossbench::grid_consistency},
      {7, "rotated IoU oracle", 30.0, lossbench::rotated_iou},
      {8, "AP oracle equivalence", 10.0, lossbench::ap_oracle},
      {9, "NMS and oracle swap", 5.0, lossbench::nms_and_swap},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    lossbench::Outcome outcome{false, ""};
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.limit_seconds;
    const bool pass = outcome.pass && in_time;
    failures += !pass;
    std::printf("%s [%d] %s: %s; %.2f s (limit %g s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                outcome.detail.c_str(), seconds, c.limit_seconds,
                in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
