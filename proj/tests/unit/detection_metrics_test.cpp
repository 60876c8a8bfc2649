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

#include "lossbench/detection_metrics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "eval_oracle.hpp"
#include "gtest/gtest.h"

namespace lossbench {
namespace {

Box3D gt(double x, double z, double l, const std::string& cat = "car") {
  return Box3D{x, 0.0, z, l, 2.0, 1.5, 0.0, cat, std::nullopt};
}

Box3D pred(double x, double z, double l, double score,
           const std::string& cat = "car") {
  return Box3D{x, 0.0, z, l, 2.0, 1.5, 0.0, cat, score};
}

TEST(MatchGreedyTest, PerfectPredictionMatches) {
  FrameSet f{"f", {pred(0, 10, 4, 0.9)}, {gt(0, 10, 4)}};
  const auto m = match_greedy(f, "car", 0.5);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].gt_index, 0u);
}

TEST(MatchGreedyTest, HigherScoreTakesTheOnlyGt) {
  FrameSet f{"f", {pred(0, 10, 4, 0.6), pred(0, 10.2, 4, 0.9)}, {gt(0, 10, 4)}};
  const auto m = match_greedy(f, "car", 0.5);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].pred_index, 1u);
  EXPECT_EQ(m[0].gt_index, 0u);
  EXPECT_EQ(m[1].pred_index, 0u);
  EXPECT_FALSE(m[1].gt_index.has_value());
}

TEST(MatchGreedyTest, PicksHighestIouThenLowerIndex) {
  FrameSet f{"f", {pred(0, 10, 4, 0.9)}, {gt(0, 11, 4), gt(0, 10, 4), gt(0, 10, 4)}};
  const auto m = match_greedy(f, "car", 0.25);
  EXPECT_EQ(m[0].gt_index, 1u);
}

TEST(MatchGreedyTest, IgnoresOtherCategoriesAndBelowThreshold) {
  FrameSet f{"f", {pred(0, 10, 4, 0.9), pred(0, 30, 4, 0.8)},
             {gt(0, 10, 4, "truck"), gt(0, 32.5, 4)}};
  const auto m = match_greedy(f, "car", 0.5);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_FALSE(m[0].gt_index.has_value());
  EXPECT_FALSE(m[1].gt_index.has_value());
}

TEST(MatchGreedyTest, RejectsBadThreshold) {
  FrameSet f{"f", {}, {}};
  EXPECT_THROW(match_greedy(f, "car", 0.0), std::invalid_argument);
  EXPECT_THROW(match_greedy(f, "car", 1.5), std::invalid_argument);
}

TEST(AveragePrecisionTest, Examples) {
  const std::vector<Detection> tp_fp_tp{{0.9, true}, {0.8, false}, {0.7, true}};
  EXPECT_NEAR(average_precision(tp_fp_tp, 2).ap, 0.5 + 0.5 * (2.0 / 3.0), 1e-12);
  const std::vector<Detection> one_tp{{0.5, true}};
  EXPECT_DOUBLE_EQ(average_precision(one_tp, 1).ap, 1.0);
  const std::vector<Detection> one_fp{{0.5, false}};
  EXPECT_DOUBLE_EQ(average_precision(one_fp, 1).ap, 0.0);
  EXPECT_DOUBLE_EQ(average_precision(one_tp, 0).ap, 0.0);
  EXPECT_DOUBLE_EQ(average_precision({}, 3).ap, 0.0);
}

TEST(AveragePrecisionTest, TiedScoresFormOnePoint) {
  const std::vector<Detection> d{{1.0, true}, {1.0, false}, {1.0, true}, {1.0, false}};
  const PrCurve c = average_precision(d, 4);
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_DOUBLE_EQ(c.points[0].precision, 0.5);
  EXPECT_DOUBLE_EQ(c.points[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(c.ap, 0.25);
}

std::vector<Detection> random_detections(std::mt19937_64& gen, int n) {
  std::uniform_int_distribution<int> s(1, 20);
  std::bernoulli_distribution tp(0.5);
  std::vector<Detection> d;
  for (int i = 0; i < n; ++i) d.push_back({s(gen) / 20.0, tp(gen)});
  return d;
}

std::vector<testing::OracleOutcome> as_outcomes(const std::vector<Detection>& d) {
  std::vector<testing::OracleOutcome> out;
  for (const auto& x : d) out.push_back({x.score, x.true_positive, 0.0});
  return out;
}

TEST(AveragePrecisionTest, AgreesWithThresholdSweepOracle) {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 300; ++rep) {
    const auto d = random_detections(gen, 1 + rep % 12);
    const std::size_t n_gt = 1 + rep % 9;
    std::size_t tps = 0;
    for (const auto& x : d) tps += x.true_positive;
    if (tps > n_gt) continue;
    EXPECT_EQ(average_precision(d, n_gt).ap, testing::oracle_ap(as_outcomes(d), n_gt));
  }
}

TEST(AveragePrecisionTest, InvariantUnderMonotoneScoreTransform) {
  std::mt19937_64 gen(12);
  for (int rep = 0; rep < 100; ++rep) {
    auto d = random_detections(gen, 10);
    const double before = average_precision(d, 10).ap;
    for (auto& x : d) x.score = std::exp(3.0 * x.score) / 100.0;
    EXPECT_DOUBLE_EQ(average_precision(d, 10).ap, before);
  }
}

TEST(AveragePrecisionTest, RemovingFalsePositiveNeverLowersAp) {
  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 200; ++rep) {
    auto d = random_detections(gen, 8);
    const double before = average_precision(d, 8).ap;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i].true_positive) continue;
      auto fewer = d;
      fewer.erase(fewer.begin() + static_cast<long>(i));
      EXPECT_GE(average_precision(fewer, 8).ap, before - 1e-12);
    }
  }
}

TEST(AveragePrecisionTest, RemovingTruePositiveNeverRaisesAp) {
  std::mt19937_64 gen(14);
  for (int rep = 0; rep < 200; ++rep) {
    auto d = random_detections(gen, 8);
    const double before = average_precision(d, 8).ap;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!d[i].true_positive) continue;
      auto fewer = d;
      fewer.erase(fewer.begin() + static_cast<long>(i));
      EXPECT_LE(average_precision(fewer, 8).ap, before + 1e-12);
    }
  }
}

TEST(LengthBinTest, LabelsAndMembership) {
  const auto bins = default_length_bins();
  ASSERT_EQ(bins.size(), 5u);
  EXPECT_EQ(bins[0].label(), "all");
  EXPECT_EQ(bins[1].label(), "[0,5)");
  EXPECT_EQ(bins[4].label(), "[15,inf)");
  EXPECT_TRUE(bins[1].contains(4.9));
  EXPECT_FALSE(bins[1].contains(5.0));
  EXPECT_TRUE(bins[3].contains(12.0));
}

TEST(EvaluateTest, PerfectPredictionsScoreOneInEveryPopulatedBin) {
  std::vector<FrameSet> frames{
      {"a", {pred(0, 10, 4.9, 0.9), pred(5, 30, 12, 0.8)}, {gt(0, 10, 4.9), gt(5, 30, 12)}},
      {"b", {pred(0, 20, 7, 0.7, "truck")}, {gt(0, 20, 7, "truck")}}};
  const ApReport r = evaluate(frames);
  ASSERT_NE(r.find("car", 0.5, "[0,5)"), nullptr);
  EXPECT_DOUBLE_EQ(r.find("car", 0.5, "[0,5)")->curve.ap, 1.0);
  EXPECT_DOUBLE_EQ(r.find("car", 0.5, "[10,15)")->curve.ap, 1.0);
  EXPECT_EQ(r.find("car", 0.5, "[10,15)")->n_gt, 1u);
  EXPECT_EQ(r.find("car", 0.5, "[5,10)")->n_gt, 0u);
  EXPECT_DOUBLE_EQ(r.find("truck", 0.25)->curve.ap, 1.0);
  ASSERT_NE(r.find_mean(0.5), nullptr);
  EXPECT_DOUBLE_EQ(r.find_mean(0.5)->ap, 1.0);
  EXPECT_EQ(r.find_mean(0.5)->n_categories, 2u);
  EXPECT_EQ(r.find_mean(0.5, "[5,10)")->n_categories, 1u);
}

TEST(EvaluateTest, GroupMeans) {
  std::vector<FrameSet> frames{
      {"a", {pred(0, 10, 4, 0.9), pred(5, 30, 12, 0.8, "truck")},
       {gt(0, 10, 4), gt(5, 60, 12, "truck")}}};
  EvalOptions opt;
  opt.groups = {{"truck", "large"}, {"car", "small"}};
  const ApReport r = evaluate(frames, opt);
  bool found = false;
  for (const auto& g : r.group_ap) {
    if (g.name == "large" && g.threshold == 0.5 && g.bin == "all") {
      EXPECT_DOUBLE_EQ(g.ap, 0.0);
      found = true;
    }
    if (g.name == "small" && g.threshold == 0.5 && g.bin == "all") {
      EXPECT_DOUBLE_EQ(g.ap, 1.0);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_DOUBLE_EQ(r.find_mean(0.5)->ap, 0.5);
}

TEST(EvaluateTest, MatchesBruteForceOracle) {
  std::mt19937_64 gen(21);
  EvalOptions opt;
  for (int rep = 0; rep < 60; ++rep) {
    std::vector<FrameSet> frames;
    for (int k = 0; k < 3; ++k) {
      frames.push_back(testing::random_small_frame(gen, 4, 3, std::to_string(k)));
    }
    const ApReport r = evaluate(frames, opt);
    const auto expected = testing::oracle_evaluate(frames, opt);
    ASSERT_EQ(r.entries.size(), expected.size());
    for (const auto& e : r.entries) {
      const auto& o = expected.at({e.category, e.threshold, e.bin});
      EXPECT_EQ(e.n_gt, o.n_gt);
      EXPECT_EQ(e.n_pred, o.n_pred);
      EXPECT_EQ(e.curve.ap, o.ap);
    }
  }
}

TEST(CenterNmsTest, SuppressesNearbySameCategory) {
  const std::vector<Box3D> boxes{pred(0, 10, 4, 0.5), pred(1, 10, 4, 0.9),
                                 pred(0, 20, 4, 0.7), pred(1, 10, 4, 0.8, "truck")};
  const auto kept = center_nms(boxes);
  ASSERT_EQ(kept.size(), 3u);
  EXPECT_DOUBLE_EQ(*kept[0].score, 0.9);
  EXPECT_DOUBLE_EQ(*kept[1].score, 0.8);
  EXPECT_DOUBLE_EQ(*kept[2].score, 0.7);
}

TEST(CenterNmsTest, DistanceEqualToRadiusIsKept) {
  const std::vector<Box3D> boxes{pred(0, 10, 4, 0.9), pred(0, 14, 4, 0.8)};
  EXPECT_EQ(center_nms(boxes, 4.0).size(), 2u);
}

TEST(CenterNmsTest, IdempotentAndSeparated) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> pos(0.0, 30.0), s(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Box3D> boxes;
    for (int i = 0; i < 25; ++i) boxes.push_back(pred(pos(gen), pos(gen), 4, s(gen)));
    const auto once = center_nms(boxes);
    const auto twice = center_nms(once);
    ASSERT_EQ(once.size(), twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      EXPECT_EQ(once[i].x, twice[i].x);
      for (std::size_t j = i + 1; j < once.size(); ++j) {
        EXPECT_GE(std::hypot(once[i].x - once[j].x, once[i].z - once[j].z), 4.0);
      }
    }
  }
}

TEST(CenterNmsTest, RejectsUnscoredBoxes) {
  const std::vector<Box3D> boxes{gt(0, 0, 4)};
  EXPECT_THROW(center_nms(boxes), std::invalid_argument);
}

TEST(OracleSwapTest, ParsesFieldLists) {
  EXPECT_EQ(parse_box_fields("x,z,yaw"), kFieldX | kFieldZ | kFieldYaw);
  EXPECT_EQ(parse_box_fields("all"), kAllBoxFields);
  EXPECT_EQ(parse_box_fields(""), 0);
  EXPECT_THROW(parse_box_fields("x,depth"), std::invalid_argument);
}

TEST(OracleSwapTest, CopiesSelectedFieldsFromNearestGt) {
  FrameSet f{"f", {pred(0.5, 10.5, 3, 0.9), pred(50, 50, 3, 0.8)},
             {gt(0, 10, 5), gt(3, 10, 6)}};
  const FrameSet swapped = oracle_swap(f, parse_box_fields("z"));
  EXPECT_DOUBLE_EQ(swapped.predictions[0].z, 10.0);
  EXPECT_DOUBLE_EQ(swapped.predictions[0].x, 0.5);
  EXPECT_DOUBLE_EQ(swapped.predictions[0].l, 3.0);
  EXPECT_DOUBLE_EQ(swapped.predictions[1].z, 50.0);
}

TEST(OracleSwapTest, SwappingNothingIsIdentityAndAllFieldsIsPerfect) {
  std::mt19937_64 gen(41);
  for (int rep = 0; rep < 30; ++rep) {
    FrameSet f{"f", {}, {}};
    for (int i = 0; i < 4; ++i) {
      const double x = 10.0 * i, z = 20.0 + 10.0 * i;
      f.ground_truths.push_back(gt(x, z, 4));
      std::uniform_real_distribution<double> j(-1.0, 1.0);
      f.predictions.push_back(pred(x + j(gen), z + j(gen), 3.0 + j(gen), 0.5 + 0.1 * i));
    }
    const FrameSet same = oracle_swap(f, 0);
    for (std::size_t i = 0; i < f.predictions.size(); ++i) {
      EXPECT_EQ(same.predictions[i].z, f.predictions[i].z);
    }
    const std::vector<FrameSet> frames{oracle_swap(f, kAllBoxFields)};
    EXPECT_DOUBLE_EQ(evaluate(frames).find("car", 0.5)->curve.ap, 1.0);
  }
}

BevGrid grid_from(const std::vector<double>& cells) {
  return BevGrid(1, cells.size(), GridExtent{0, 1, 0, static_cast<double>(cells.size())},
                 cells);
}

TEST(SegMiouTest, HalfCoverageIsOneHalf) {
  std::vector<CategoryGrids> cats{
      {"car", true, {{grid_from({1, 1, 0, 0}), grid_from({1, 1, 1, 1})}}}};
  const auto r = seg_miou(cats);
  EXPECT_DOUBLE_EQ(*r.categories[0].iou, 0.5);
  EXPECT_DOUBLE_EQ(*r.mean_foreground, 0.5);
}

TEST(SegMiouTest, BinarizesAtThresholdInclusive) {
  std::vector<CategoryGrids> cats{
      {"car", true, {{grid_from({0.5, 0.49}), grid_from({1, 1})}}}};
  EXPECT_DOUBLE_EQ(*seg_miou(cats).categories[0].iou, 0.5);
}

TEST(SegMiouTest, DatasetLevelVersusPerFrame) {
  std::vector<CategoryGrids> cats{
      {"car", true,
       {{grid_from({1, 0, 0, 0}), grid_from({1, 0, 0, 0})},
        {grid_from({1, 1, 1, 0}), grid_from({1, 0, 0, 0})},
        {grid_from({0, 0, 0, 0}), grid_from({0, 0, 0, 0})}}}};
  EXPECT_DOUBLE_EQ(*seg_miou(cats).categories[0].iou, 2.0 / 4.0);
  EXPECT_DOUBLE_EQ(*seg_miou(cats, 0.5, true).categories[0].iou, (1.0 + 1.0 / 3.0) / 2.0);
}

TEST(SegMiouTest, BackgroundOnlyEntersOverallMean) {
  std::vector<CategoryGrids> cats{
      {"car", true, {{grid_from({1, 1}), grid_from({1, 1})}}},
      {"road", false, {{grid_from({1, 0}), grid_from({1, 1})}}},
      {"bus", true, {{grid_from({0, 0}), grid_from({0, 0})}}}};
  const auto r = seg_miou(cats);
  EXPECT_FALSE(r.categories[2].iou.has_value());
  EXPECT_DOUBLE_EQ(*r.mean_foreground, 1.0);
  EXPECT_DOUBLE_EQ(*r.mean_all, 0.75);
}

TEST(SegMiouTest, ShapeMismatchThrows) {
  std::vector<CategoryGrids> cats{{"car", true, {{grid_from({1, 1}), grid_from({1, 1, 1})}}}};
  EXPECT_THROW(seg_miou(cats), std::invalid_argument);
}

}  // namespace
}  // namespace lossbench
