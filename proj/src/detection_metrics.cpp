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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "lossbench/number_format.hpp"

namespace lossbench {

namespace {

std::vector<std::size_t> score_order(std::span<const Box3D> boxes) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].score.value_or(0.0) > boxes[b].score.value_or(0.0);
  });
  return order;
}

double bev_distance(const Box3D& a, const Box3D& b) {
  return std::hypot(a.x - b.x, a.z - b.z);
}

}  // namespace

void FrameSet::validate() const {
  for (const Box3D& p : predictions) {
    p.validate();
    if (!p.score) {
      throw std::invalid_argument("frame '" + frame_id +
                                  "': prediction without score");
    }
  }
  for (const Box3D& g : ground_truths) g.validate();
}

double depth_ray_iou(const Box3D& pred, const Box3D& gt) {
  return ray_iou({gt.z, gt.l}, {pred.z, pred.l});
}

std::vector<Match> match_greedy(const FrameSet& frame,
                                std::string_view category,
                                double iou_threshold, const IouFn& iou) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("iou threshold must lie in (0, 1]");
  }
  std::vector<std::size_t> gts;
  for (std::size_t g = 0; g < frame.ground_truths.size(); ++g) {
    if (frame.ground_truths[g].category == category) gts.push_back(g);
  }
  std::vector<bool> taken(frame.ground_truths.size(), false);
  std::vector<Match> matches;
  for (std::size_t p : score_order(frame.predictions)) {
    const Box3D& pred = frame.predictions[p];
    if (pred.category != category) continue;
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t g : gts) {
      if (taken[g]) continue;
      const double v = iou(pred, frame.ground_truths[g]);
      if (v >= iou_threshold && v > best_iou) {
        best = g;
        best_iou = v;
      }
    }
    if (best) taken[*best] = true;
    matches.push_back({p, best, pred.score.value_or(0.0)});
  }
  return matches;
}

PrCurve average_precision(std::span<const Detection> detections,
                          std::size_t n_gt) {
  std::vector<Detection> sorted(detections.begin(), detections.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.score > b.score;
                   });
  PrCurve curve;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    (sorted[i].true_positive ? tp : fp) += 1;
    if (i + 1 < sorted.size() && sorted[i + 1].score == sorted[i].score) {
      continue;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall =
        n_gt ? static_cast<double>(tp) / static_cast<double>(n_gt) : 0.0;
    curve.points.push_back({sorted[i].score, precision, recall});
  }
  if (n_gt == 0) return curve;

  // Precision envelope from the right, then area under the step function.
  double envelope = 0.0;
  std::vector<double> interpolated(curve.points.size());
  for (std::size_t k = curve.points.size(); k-- > 0;) {
    envelope = std::max(envelope, curve.points[k].precision);
    interpolated[k] = envelope;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    ap += (curve.points[k].recall - prev_recall) * interpolated[k];
    prev_recall = curve.points[k].recall;
  }
  curve.ap = std::clamp(ap, 0.0, 1.0);
  return curve;
}

std::string LengthBin::label() const {
  if (all) return "all";
  return "[" + format_number(lo) + "," + format_number(hi) + ")";
}

std::vector<LengthBin> default_length_bins() {
  const double inf = std::numeric_limits<double>::infinity();
  return {{0.0, inf, true}, {0.0, 5.0}, {5.0, 10.0}, {10.0, 15.0}, {15.0, inf}};
}

const ApEntry* ApReport::find(std::string_view category, double threshold,
                              std::string_view bin) const {
  for (const ApEntry& e : entries) {
    if (e.category == category && e.threshold == threshold && e.bin == bin) {
      return &e;
    }
  }
  return nullptr;
}

const ApAggregate* ApReport::find_mean(double threshold,
                                       std::string_view bin) const {
  for (const ApAggregate& a : mean_ap) {
    if (a.threshold == threshold && a.bin == bin) return &a;
  }
  return nullptr;
}

ApReport evaluate(std::span<const FrameSet> frames, const EvalOptions& options) {
  std::set<std::string> categories;
  for (const FrameSet& f : frames) {
    f.validate();
    for (const Box3D& b : f.predictions) categories.insert(b.category);
    for (const Box3D& b : f.ground_truths) categories.insert(b.category);
  }

  ApReport report;
  const std::size_t n_bins = options.bins.size();
  for (const std::string& category : categories) {
    for (double threshold : options.thresholds) {
      std::vector<std::vector<Detection>> detections(n_bins);
      std::vector<std::size_t> n_gt(n_bins, 0);
      for (const FrameSet& f : frames) {
        for (const Box3D& g : f.ground_truths) {
          if (g.category != category) continue;
          for (std::size_t b = 0; b < n_bins; ++b) {
            if (options.bins[b].contains(g.max_dimension())) ++n_gt[b];
          }
        }
        for (const Match& m : match_greedy(f, category, threshold, options.iou)) {
          const double size = m.gt_index
                                  ? f.ground_truths[*m.gt_index].max_dimension()
                                  : f.predictions[m.pred_index].max_dimension();
          for (std::size_t b = 0; b < n_bins; ++b) {
            if (options.bins[b].contains(size)) {
              detections[b].push_back({m.score, m.gt_index.has_value()});
            }
          }
        }
      }
      for (std::size_t b = 0; b < n_bins; ++b) {
        report.entries.push_back({category, threshold, options.bins[b].label(),
                                  average_precision(detections[b], n_gt[b]),
                                  n_gt[b], detections[b].size()});
      }
    }
  }

  auto aggregate = [&](const std::string& name, auto&& member) {
    std::vector<ApAggregate> out;
    for (double threshold : options.thresholds) {
      for (const LengthBin& bin : options.bins) {
        const std::string label = bin.label();
        double sum = 0.0;
        std::size_t n = 0;
        for (const ApEntry& e : report.entries) {
          if (e.threshold != threshold || e.bin != label || e.n_gt == 0 ||
              !member(e.category)) {
            continue;
          }
          sum += e.curve.ap;
          ++n;
        }
        if (n > 0) out.push_back({name, threshold, label, sum / n, n});
      }
    }
    return out;
  };
  report.mean_ap = aggregate("mAP", [](const std::string&) { return true; });
  std::set<std::string> group_names;
  for (const auto& [category, group] : options.groups) group_names.insert(group);
  for (const std::string& group : group_names) {
    auto rows = aggregate(group, [&](const std::string& category) {
      const auto it = options.groups.find(category);
      return it != options.groups.end() && it->second == group;
    });
    report.group_ap.insert(report.group_ap.end(), rows.begin(), rows.end());
  }
  return report;
}

std::vector<Box3D> center_nms(std::span<const Box3D> boxes, double radius) {
  for (const Box3D& b : boxes) {
    if (!b.score) throw std::invalid_argument("center_nms: unscored box");
  }
  std::vector<Box3D> kept;
  for (std::size_t i : score_order(boxes)) {
    const Box3D& candidate = boxes[i];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Box3D& k) {
      return k.category == candidate.category &&
             bev_distance(k, candidate) < radius;
    });
    if (!suppressed) kept.push_back(candidate);
  }
  return kept;
}

BoxFieldSet parse_box_fields(std::string_view text) {
  BoxFieldSet fields = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string_view token = text.substr(start, end - start);
    if (token == "x") fields |= kFieldX;
    else if (token == "y") fields |= kFieldY;
    else if (token == "z") fields |= kFieldZ;
    else if (token == "l") fields |= kFieldL;
    else if (token == "w") fields |= kFieldW;
    else if (token == "h") fields |= kFieldH;
    else if (token == "yaw") fields |= kFieldYaw;
    else if (token == "all") fields |= kAllBoxFields;
    else if (!token.empty()) {
      throw std::invalid_argument("unknown box field '" + std::string(token) + "'");
    }
    start = end + 1;
  }
  return fields;
}

FrameSet oracle_swap(const FrameSet& frame, BoxFieldSet fields, double radius) {
  FrameSet out = frame;
  if (fields == 0) return out;
  for (Box3D& pred : out.predictions) {
    const Box3D* nearest = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const Box3D& gt : frame.ground_truths) {
      if (gt.category != pred.category) continue;
      const double d = bev_distance(pred, gt);
      if (d < best) {
        best = d;
        nearest = &gt;
      }
    }
    if (!nearest || !(best < radius)) continue;
    if (fields & kFieldX) pred.x = nearest->x;
    if (fields & kFieldY) pred.y = nearest->y;
    if (fields & kFieldZ) pred.z = nearest->z;
    if (fields & kFieldL) pred.l = nearest->l;
    if (fields & kFieldW) pred.w = nearest->w;
    if (fields & kFieldH) pred.h = nearest->h;
    if (fields & kFieldYaw) pred.yaw = nearest->yaw;
  }
  return out;
}

SegIoUReport seg_miou(std::span<const CategoryGrids> categories,
                      double binarize_threshold, bool per_frame) {
  SegIoUReport report;
  double fg_sum = 0.0, all_sum = 0.0;
  std::size_t fg_n = 0, all_n = 0;
  for (const CategoryGrids& cat : categories) {
    std::size_t inter_total = 0, union_total = 0;
    double frame_iou_sum = 0.0;
    std::size_t frames_counted = 0;
    for (const auto& [pred, gt] : cat.frames) {
      if (!pred.same_shape(gt)) {
        throw std::invalid_argument("seg_miou: category '" + cat.category +
                                    "' has mismatched grid shapes");
      }
      std::size_t inter = 0, uni = 0;
      const auto p = pred.cells();
      const auto g = gt.cells();
      for (std::size_t i = 0; i < p.size(); ++i) {
        const bool pi = p[i] >= binarize_threshold;
        const bool gi = g[i] >= binarize_threshold;
        inter += pi && gi;
        uni += pi || gi;
      }
      if (uni == 0) continue;
      inter_total += inter;
      union_total += uni;
      frame_iou_sum += static_cast<double>(inter) / static_cast<double>(uni);
      ++frames_counted;
    }
    std::optional<double> iou;
    if (frames_counted > 0) {
      iou = per_frame ? frame_iou_sum / static_cast<double>(frames_counted)
                      : static_cast<double>(inter_total) /
                            static_cast<double>(union_total);
      all_sum += *iou;
      ++all_n;
      if (cat.foreground) {
        fg_sum += *iou;
        ++fg_n;
      }
    }
    report.categories.push_back({cat.category, cat.foreground, iou});
  }
  if (fg_n) report.mean_foreground = fg_sum / static_cast<double>(fg_n);
  if (all_n) report.mean_all = all_sum / static_cast<double>(all_n);
  return report;
}

}  // namespace lossbench
