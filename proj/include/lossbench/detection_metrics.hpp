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

#ifndef LOSSBENCH_DETECTION_METRICS_HPP_
#define LOSSBENCH_DETECTION_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lossbench/bev_geometry.hpp"

namespace lossbench {

/// Predictions and ground truth of one frame. Every prediction is scored.
struct FrameSet {
  std::string frame_id;
  std::vector<Box3D> predictions;
  std::vector<Box3D> ground_truths;

  void validate() const;
};

/// Overlap predicate used for matching: iou(prediction, ground_truth).
using IouFn = std::function<double(const Box3D&, const Box3D&)>;

/// IoU of the two boxes' depth intervals along z (lengths l). Used when depth
/// is the only source of error.
double depth_ray_iou(const Box3D& pred, const Box3D& gt);

struct Match {
  std::size_t pred_index;
  std::optional<std::size_t> gt_index;
  double score;
};

/// Greedy matching of one category's predictions, in score-descending order
/// (ties keep input order). Each prediction takes the unmatched GT of the same
/// category with the highest IoU >= threshold; IoU ties go to the lower GT
/// index. Indices refer to the frame's own vectors.
std::vector<Match> match_greedy(const FrameSet& frame,
                                std::string_view category,
                                double iou_threshold,
                                const IouFn& iou = iou3d);

struct Detection {
  double score;
  bool true_positive;
};

struct PrPoint {
  double score_threshold;
  double precision;
  double recall;
};

/// Operating points in score-descending order; equal scores form one point.
struct PrCurve {
  std::vector<PrPoint> points;
  double ap = 0.0;
};

/// All-point interpolated AP. ap is 0 when n_gt is 0.
PrCurve average_precision(std::span<const Detection> detections,
                          std::size_t n_gt);

/// Lengthwise bin on max(l, w, h), half-open [lo, hi). The "all" bin admits
/// every box.
struct LengthBin {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  bool all = false;

  bool contains(double length) const {
    return all || (length >= lo && length < hi);
  }
  std::string label() const;
};

/// all, [0,5), [5,10), [10,15), [15,inf).
std::vector<LengthBin> default_length_bins();

struct EvalOptions {
  std::vector<double> thresholds{0.5, 0.25};
  std::vector<LengthBin> bins = default_length_bins();
  IouFn iou = iou3d;
  /// category -> group name, for grouped means such as "large".
  std::map<std::string, std::string> groups;
};

struct ApEntry {
  std::string category;
  double threshold;
  std::string bin;
  PrCurve curve;
  std::size_t n_gt;
  std::size_t n_pred;
};

/// Mean AP over categories with at least one GT in the bin.
struct ApAggregate {
  std::string name;  // "mAP" or a group name
  double threshold;
  std::string bin;
  double ap;
  std::size_t n_categories;
};

struct ApReport {
  std::vector<ApEntry> entries;  // sorted by (category, threshold, bin order)
  std::vector<ApAggregate> mean_ap;
  std::vector<ApAggregate> group_ap;

  const ApEntry* find(std::string_view category, double threshold,
                      std::string_view bin = "all") const;
  const ApAggregate* find_mean(double threshold,
                               std::string_view bin = "all") const;
};

/// Matching runs once per (frame, category, threshold) over all GTs. A GT
/// belongs to the bin of its max dimension; a matched prediction follows its
/// GT, an unmatched one uses its own max dimension.
ApReport evaluate(std::span<const FrameSet> frames,
                  const EvalOptions& options = {});

/// Keeps the highest-score box and drops same-category boxes whose BEV center
/// lies closer than radius; repeats. Output is score-descending with ties in
/// input order. Throws std::invalid_argument for unscored boxes.
std::vector<Box3D> center_nms(std::span<const Box3D> boxes,
                              double radius = 4.0);

enum BoxField : std::uint8_t {
  kFieldX = 1 << 0,
  kFieldY = 1 << 1,
  kFieldZ = 1 << 2,
  kFieldL = 1 << 3,
  kFieldW = 1 << 4,
  kFieldH = 1 << 5,
  kFieldYaw = 1 << 6,
};
using BoxFieldSet = std::uint8_t;
constexpr BoxFieldSet kAllBoxFields = 0x7F;

/// Parses a comma-separated list such as "x,z,yaw" ("all" for every field).
BoxFieldSet parse_box_fields(std::string_view text);

/// Copies the selected fields from the nearest same-category GT (BEV center
/// distance, ties to the lower index) into each prediction whose nearest GT
/// lies strictly closer than radius.
FrameSet oracle_swap(const FrameSet& frame, BoxFieldSet fields,
                     double radius = 4.0);

struct CategoryGrids {
  std::string category;
  bool foreground = true;
  /// (prediction, ground truth) per frame.
  std::vector<std::pair<BevGrid, BevGrid>> frames;
};

struct SegIoUReport {
  struct Entry {
    std::string category;
    bool foreground;
    std::optional<double> iou;  // empty when every frame is empty on both sides
  };
  std::vector<Entry> categories;
  std::optional<double> mean_foreground;
  std::optional<double> mean_all;
};

/// Binarizes cells at >= threshold. Dataset-level IoU by default (sum
/// intersections and unions over frames, then divide); per_frame averages
/// per-frame IoUs instead. Frames empty on both sides are skipped. Throws
/// std::invalid_argument on shape mismatch.
SegIoUReport seg_miou(std::span<const CategoryGrids> categories,
                      double binarize_threshold = 0.5,
                      bool per_frame = false);

}  // namespace lossbench

#endif  // LOSSBENCH_DETECTION_METRICS_HPP_
