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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lossbench/bev_geometry.hpp"
#include "lossbench/detection_metrics.hpp"
#include "lossbench/loss_theory.hpp"
#include "lossbench/sgd_lab.hpp"
#include "lossbench/synthetic_bench.hpp"

namespace py = pybind11;
using namespace lossbench;

namespace {

SgdConfig make_sgd_config(const std::string& loss, double parameter, double sigma, int dim,
                          std::int64_t steps, int trials, const std::string& mode,
                          std::uint64_t seed, std::int64_t variance_samples,
                          unsigned threads) {
  SgdConfig c;
  c.loss = LossKind::parse(loss, parameter);
  c.sigma = sigma;
  c.dim = dim;
  c.steps = steps;
  c.trials = trials;
  if (mode == "idealized") c.mode = SgdMode::kIdealized;
  else if (mode == "literal") c.mode = SgdMode::kLiteral;
  else throw std::invalid_argument("mode must be 'idealized' or 'literal'");
  c.base_seed = seed;
  c.variance_samples = variance_samples;
  c.threads = threads;
  return c;
}

LossFamily family_of(const std::string& name) {
  return LossKind::parse(name, 1.0).family();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Loss-variance theory, SGD simulation and BEV detection metrics";

  // ------------------------------------------------------------ losses
  py::class_<LossKind>(m, "LossKind")
      .def_static("l1", &LossKind::l1)
      .def_static("l2", &LossKind::l2)
      .def_static("smooth_l1", &LossKind::smooth_l1, py::arg("beta"))
      .def_static("dice", &LossKind::dice, py::arg("length"))
      .def_static("parse", &LossKind::parse, py::arg("name"), py::arg("parameter") = 1.0)
      .def_property_readonly("name", &LossKind::name)
      .def_property_readonly("parameter", &LossKind::parameter)
      .def("__eq__", [](const LossKind& a, const LossKind& b) { return a == b; })
      .def("__repr__", [](const LossKind& k) {
        return "LossKind('" + k.name() + "', " + std::to_string(k.parameter()) + ")";
      });

  m.def("loss_value", &loss_value, py::arg("kind"), py::arg("eta"));
  m.def("loss_gradient", &loss_gradient, py::arg("kind"), py::arg("eta"));
  m.def(
      "closed_form_variance",
      [](const LossKind& kind, double sigma) { return closed_form_variance(kind, NoiseModel(sigma)); },
      py::arg("kind"), py::arg("sigma"),
      "Var(d loss / d eta) under N(0, sigma^2) noise; None for smoothl1.");
  m.def("sigma_m", &sigma_m, py::arg("length"));

  py::class_<ThresholdResult>(m, "ThresholdResult")
      .def_readonly("sigma_m", &ThresholdResult::sigma_m)
      .def_readonly("sigma_l1", &ThresholdResult::sigma_l1)
      .def_readonly("sigma_c", &ThresholdResult::sigma_c)
      .def_readonly("length", &ThresholdResult::length)
      .def_readonly("solver_residual", &ThresholdResult::solver_residual)
      .def_readonly("iterations", &ThresholdResult::iterations);
  m.def("sigma_c", &sigma_c, py::arg("length"));

  // ------------------------------------------------------------ sgd
  py::class_<VarianceEstimate>(m, "VarianceEstimate")
      .def_readonly("variance", &VarianceEstimate::variance)
      .def_readonly("std_error", &VarianceEstimate::std_error);
  m.def("empirical_gradient_variance", &empirical_gradient_variance, py::arg("kind"),
        py::arg("sigma"), py::arg("samples") = 1'000'000, py::arg("seed") = 0);

  py::class_<EnsembleStats>(m, "EnsembleStats")
      .def_readonly("mean_deviation_sq", &EnsembleStats::mean_deviation_sq)
      .def_readonly("std_error", &EnsembleStats::std_error)
      .def_readonly("empirical_grad_variance", &EnsembleStats::empirical_grad_variance)
      .def_readonly("grad_variance_std_error", &EnsembleStats::grad_variance_std_error);
  m.def(
      "run_ensemble",
      [](const std::string& loss, double parameter, double sigma, int dim, std::int64_t steps,
         int trials, const std::string& mode, std::uint64_t seed,
         std::int64_t variance_samples, unsigned threads) {
        const SgdConfig c = make_sgd_config(loss, parameter, sigma, dim, steps, trials, mode,
                                            seed, variance_samples, threads);
        py::gil_scoped_release release;
        return run_ensemble(c);
      },
      py::arg("loss") = "l2", py::arg("parameter") = 1.0, py::arg("sigma") = 1.0,
      py::arg("dim") = 1, py::arg("steps") = 1000, py::arg("trials") = 1,
      py::arg("mode") = "idealized", py::arg("seed") = 0,
      py::arg("variance_samples") = 1'000'000, py::arg("threads") = 0,
      "SGD ensemble; parameter is the dice length or smoothl1 beta.");
  m.def("cumulative_square_sum",
        [](std::int64_t steps) { return StepSchedule{}.cumulative_square_sum(steps); },
        py::arg("steps"), "Sum of (1/j)^2 for j = 1..steps.");

  py::class_<ConvergenceFit>(m, "ConvergenceFit")
      .def_readonly("c1", &ConvergenceFit::c1)
      .def_readonly("c2", &ConvergenceFit::c2)
      .def_readonly("r_squared", &ConvergenceFit::r_squared);
  m.def(
      "fit_deviation_line",
      [](const std::vector<std::pair<double, double>>& points) { return fit_deviation_line(points); },
      py::arg("points"));

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("loss", &SweepRow::loss)
      .def_readonly("length", &SweepRow::length)
      .def_readonly("sigma", &SweepRow::sigma)
      .def_readonly("var_closed", &SweepRow::var_closed)
      .def_readonly("var_empirical", &SweepRow::var_empirical)
      .def_readonly("var_std_error", &SweepRow::var_std_error)
      .def_readonly("mean_deviation", &SweepRow::mean_deviation)
      .def_readonly("std_error", &SweepRow::std_error);
  m.def(
      "sweep",
      [](const std::vector<double>& lengths, const std::vector<double>& sigmas,
         const std::vector<std::string>& losses, double beta, int dim, std::int64_t steps,
         int trials, const std::string& mode, std::uint64_t seed,
         std::int64_t variance_samples, unsigned threads) {
        std::vector<SweepLoss> sl;
        for (const auto& name : losses) sl.push_back({family_of(name), beta});
        const SgdConfig t = make_sgd_config("l2", 1.0, 1.0, dim, steps, trials, mode, seed,
                                            variance_samples, threads);
        py::gil_scoped_release release;
        return sweep(lengths, sigmas, sl, t);
      },
      py::arg("lengths"), py::arg("sigmas"),
      py::arg("losses") = std::vector<std::string>{"l1", "l2", "dice"}, py::arg("beta") = 1.0,
      py::arg("dim") = 1, py::arg("steps") = 1000, py::arg("trials") = 100,
      py::arg("mode") = "idealized", py::arg("seed") = 0,
      py::arg("variance_samples") = 200'000, py::arg("threads") = 0);

  // ------------------------------------------------------------ geometry
  py::class_<Box3D>(m, "Box3D")
      .def(py::init([](double x, double y, double z, double l, double w, double h, double yaw,
                       std::string category, std::optional<double> score) {
             Box3D b{x, y, z, l, w, h, yaw, std::move(category), score};
             b.validate();
             return b;
           }),
           py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0, py::arg("l") = 1.0,
           py::arg("w") = 1.0, py::arg("h") = 1.0, py::arg("yaw") = 0.0,
           py::arg("category") = "", py::arg("score") = py::none())
      .def_readwrite("x", &Box3D::x)
      .def_readwrite("y", &Box3D::y)
      .def_readwrite("z", &Box3D::z)
      .def_readwrite("l", &Box3D::l)
      .def_readwrite("w", &Box3D::w)
      .def_readwrite("h", &Box3D::h)
      .def_readwrite("yaw", &Box3D::yaw)
      .def_readwrite("category", &Box3D::category)
      .def_readwrite("score", &Box3D::score)
      .def("__repr__", [](const Box3D& b) {
        return "Box3D(x=" + std::to_string(b.x) + ", z=" + std::to_string(b.z) +
               ", l=" + std::to_string(b.l) + ", category='" + b.category + "')";
      });

  m.def("bev_iou", &bev_iou, py::arg("a"), py::arg("b"));
  m.def("iou3d", &iou3d, py::arg("a"), py::arg("b"));
  m.def(
      "ray_iou",
      [](double depth_a, double length_a, double depth_b, double length_b) {
        return ray_iou({depth_a, length_a}, {depth_b, length_b});
      },
      py::arg("depth_a"), py::arg("length_a"), py::arg("depth_b"), py::arg("length_b"));

  // ------------------------------------------------------------ metrics
  py::class_<FrameSet>(m, "FrameSet")
      .def(py::init([](std::string frame_id, std::vector<Box3D> predictions,
                       std::vector<Box3D> ground_truths) {
             FrameSet f{std::move(frame_id), std::move(predictions), std::move(ground_truths)};
             f.validate();
             return f;
           }),
           py::arg("frame_id"), py::arg("predictions"), py::arg("ground_truths"))
      .def_readwrite("frame_id", &FrameSet::frame_id)
      .def_readwrite("predictions", &FrameSet::predictions)
      .def_readwrite("ground_truths", &FrameSet::ground_truths);

  py::class_<ApEntry>(m, "ApEntry")
      .def_readonly("category", &ApEntry::category)
      .def_readonly("threshold", &ApEntry::threshold)
      .def_readonly("bin", &ApEntry::bin)
      .def_property_readonly("ap", [](const ApEntry& e) { return e.curve.ap; })
      .def_readonly("n_gt", &ApEntry::n_gt)
      .def_readonly("n_pred", &ApEntry::n_pred);
  py::class_<ApAggregate>(m, "ApAggregate")
      .def_readonly("name", &ApAggregate::name)
      .def_readonly("threshold", &ApAggregate::threshold)
      .def_readonly("bin", &ApAggregate::bin)
      .def_readonly("ap", &ApAggregate::ap)
      .def_readonly("n_categories", &ApAggregate::n_categories);
  py::class_<ApReport>(m, "ApReport")
      .def_readonly("entries", &ApReport::entries)
      .def_readonly("mean_ap", &ApReport::mean_ap)
      .def_readonly("group_ap", &ApReport::group_ap)
      .def(
          "ap",
          [](const ApReport& r, const std::string& category, double threshold,
             const std::string& bin) -> std::optional<double> {
            const ApEntry* e = r.find(category, threshold, bin);
            if (!e) return std::nullopt;
            return e->curve.ap;
          },
          py::arg("category"), py::arg("threshold"), py::arg("bin") = "all")
      .def(
          "mean",
          [](const ApReport& r, double threshold, const std::string& bin) -> std::optional<double> {
            const ApAggregate* a = r.find_mean(threshold, bin);
            if (!a) return std::nullopt;
            return a->ap;
          },
          py::arg("threshold"), py::arg("bin") = "all");

  m.def(
      "evaluate",
      [](const std::vector<FrameSet>& frames, const std::vector<double>& thresholds,
         const std::string& metric, const std::map<std::string, std::string>& groups) {
        EvalOptions opt;
        opt.thresholds = thresholds;
        opt.groups = groups;
        if (metric == "iou3d") opt.iou = iou3d;
        else if (metric == "bev") opt.iou = bev_iou;
        else if (metric == "depth") opt.iou = depth_ray_iou;
        else throw std::invalid_argument("metric must be 'iou3d', 'bev' or 'depth'");
        return evaluate(frames, opt);
      },
      py::arg("frames"), py::arg("thresholds") = std::vector<double>{0.5, 0.25},
      py::arg("metric") = "iou3d",
      py::arg("groups") = std::map<std::string, std::string>{},
      "AP per category, threshold and default length bin.");

  m.def(
      "center_nms",
      [](const std::vector<Box3D>& boxes, double radius) { return center_nms(boxes, radius); },
      py::arg("boxes"), py::arg("radius") = 4.0);
  m.def(
      "oracle_swap",
      [](const FrameSet& frame, const std::string& fields, double radius) {
        return oracle_swap(frame, parse_box_fields(fields), radius);
      },
      py::arg("frame"), py::arg("fields") = "all", py::arg("radius") = 4.0);

  // ------------------------------------------------------------ synthetic
  py::class_<LossSummary>(m, "LossSummary")
      .def_readonly("loss", &LossSummary::loss)
      .def_readonly("mean_ap50", &LossSummary::mean_ap50)
      .def_readonly("mean_ap25", &LossSummary::mean_ap25)
      .def_readonly("ap50_std_error", &LossSummary::ap50_std_error)
      .def_readonly("mean_abs_err", &LossSummary::mean_abs_err)
      .def_readonly("mean_deviation_sq", &LossSummary::mean_deviation_sq);
  py::class_<DiceComparison>(m, "DiceComparison")
      .def_readonly("versus", &DiceComparison::versus)
      .def_readonly("mean_ap50_difference", &DiceComparison::mean_ap50_difference)
      .def_readonly("win_rate", &DiceComparison::win_rate);
  py::class_<SeedOutcome>(m, "SeedOutcome")
      .def_readonly("loss", &SeedOutcome::loss)
      .def_readonly("length", &SeedOutcome::length)
      .def_readonly("seed", &SeedOutcome::seed)
      .def_readonly("ap50", &SeedOutcome::ap50)
      .def_readonly("ap25", &SeedOutcome::ap25)
      .def_readonly("mean_abs_err", &SeedOutcome::mean_abs_err);
  py::class_<LengthReport>(m, "LengthReport")
      .def_readonly("length", &LengthReport::length)
      .def_readonly("threshold", &LengthReport::threshold)
      .def_readonly("precondition_met", &LengthReport::precondition_met)
      .def_readonly("losses", &LengthReport::losses)
      .def_readonly("comparisons", &LengthReport::comparisons)
      .def_readonly("win_rate_both", &LengthReport::win_rate_both);
  py::class_<DiceAdvantageReport>(m, "DiceAdvantageReport")
      .def_readonly("sigma", &DiceAdvantageReport::sigma)
      .def_readonly("seeds", &DiceAdvantageReport::seeds)
      .def_readonly("lengths", &DiceAdvantageReport::lengths);
  m.def(
      "dice_advantage_experiment",
      [](const std::vector<double>& lengths, double sigma, int n_seeds, int objects, int dim,
         std::int64_t steps, std::uint64_t seed, unsigned threads) {
        DiceAdvantageConfig c;
        c.lengths = lengths;
        c.sigma = sigma;
        c.n_seeds = n_seeds;
        c.objects = objects;
        c.seed = seed;
        c.sgd.dim = dim;
        c.sgd.steps = steps;
        c.sgd.threads = threads;
        py::gil_scoped_release release;
        return dice_advantage_experiment(c);
      },
      py::arg("lengths") = std::vector<double>{12.0}, py::arg("sigma") = 0.5,
      py::arg("n_seeds") = 20, py::arg("objects") = 10'000, py::arg("dim") = 16,
      py::arg("steps") = 5000, py::arg("seed") = 0, py::arg("threads") = 0,
      "Trains l1, l2 and dice per seed and compares AP on synthetic scenes.");
}
