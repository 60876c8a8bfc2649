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

#include "lossbench/bev_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace lossbench {

namespace {

constexpr double kCollinearTolerance = 1e-12;
constexpr double kAxisTolerance = 1e-12;
constexpr int kSupersample = 4;

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.z - o.z) - (a.z - o.z) * (b.x - o.x);
}

double polygon_area(std::span<const Vec2> poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    twice += p.x * q.z - q.x * p.z;
  }
  return 0.5 * twice;
}

Vec2 line_intersection(const Vec2& p, const Vec2& q, const Vec2& a,
                       const Vec2& b) {
  const double dpx = q.x - p.x, dpz = q.z - p.z;
  const double dax = b.x - a.x, daz = b.z - a.z;
  const double denom = dpx * daz - dpz * dax;
  if (std::abs(denom) < kCollinearTolerance) return q;
  const double t = ((a.x - p.x) * daz - (a.z - p.z) * dax) / denom;
  return {p.x + t * dpx, p.z + t * dpz};
}

double interval_overlap(double a_lo, double a_hi, double b_lo, double b_hi) {
  return std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
}

struct Interval {
  double lo;
  double hi;
};

Interval ray_interval(const RayObject& r) {
  return {r.depth - 0.5 * r.length, r.depth + 0.5 * r.length};
}

// Axis-aligned footprint, when the yaw is a multiple of pi/2.
struct Rect {
  double x_lo, x_hi, z_lo, z_hi;
};

std::optional<Rect> axis_aligned_rect(const Box3D& box) {
  const double quarter = std::numbers::pi / 2.0;
  const double turns = box.yaw / quarter;
  const double nearest = std::round(turns);
  if (std::abs(turns - nearest) * quarter > kAxisTolerance) return std::nullopt;
  const bool swapped = static_cast<long long>(nearest) % 2 != 0;
  const double half_x = 0.5 * (swapped ? box.l : box.w);
  const double half_z = 0.5 * (swapped ? box.w : box.l);
  return Rect{box.x - half_x, box.x + half_x, box.z - half_z, box.z + half_z};
}

// Exact area of the union of rectangles clipped to `cell`.
double union_area(std::span<const Rect> rects, const Rect& cell) {
  std::vector<double> xs{cell.x_lo, cell.x_hi};
  std::vector<double> zs{cell.z_lo, cell.z_hi};
  for (const Rect& r : rects) {
    xs.push_back(std::clamp(r.x_lo, cell.x_lo, cell.x_hi));
    xs.push_back(std::clamp(r.x_hi, cell.x_lo, cell.x_hi));
    zs.push_back(std::clamp(r.z_lo, cell.z_lo, cell.z_hi));
    zs.push_back(std::clamp(r.z_hi, cell.z_lo, cell.z_hi));
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(zs.begin(), zs.end());
  zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double mx = 0.5 * (xs[i] + xs[i + 1]);
    for (std::size_t j = 0; j + 1 < zs.size(); ++j) {
      const double mz = 0.5 * (zs[j] + zs[j + 1]);
      const bool covered = std::any_of(rects.begin(), rects.end(), [&](const Rect& r) {
        return mx > r.x_lo && mx < r.x_hi && mz > r.z_lo && mz < r.z_hi;
      });
      if (covered) area += (xs[i + 1] - xs[i]) * (zs[j + 1] - zs[j]);
    }
  }
  return area;
}

bool footprint_contains(const Box3D& box, double px, double pz) {
  const double dx = px - box.x;
  const double dz = pz - box.z;
  const double s = std::sin(box.yaw);
  const double c = std::cos(box.yaw);
  const double along = dx * s + dz * c;    // length axis (sin, cos)
  const double across = dx * c - dz * s;   // width axis (cos, -sin)
  return std::abs(along) <= 0.5 * box.l && std::abs(across) <= 0.5 * box.w;
}

}  // namespace

double normalize_yaw(double yaw) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(yaw, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  if (r > std::numbers::pi) r -= two_pi;
  return r;
}

void Box3D::validate() const {
  for (double v : {x, y, z, l, w, h, yaw}) {
    if (!std::isfinite(v)) throw std::invalid_argument("box field not finite");
  }
  if (!(l > 0.0 && w > 0.0 && h > 0.0)) {
    throw std::invalid_argument("box dimensions must be positive");
  }
  if (score && !(*score >= 0.0 && *score <= 1.0)) {
    throw std::invalid_argument("box score must lie in [0, 1]");
  }
}

std::array<Vec2, 4> Box3D::footprint() const {
  const double s = std::sin(yaw);
  const double c = std::cos(yaw);
  const Vec2 along{0.5 * l * s, 0.5 * l * c};
  const Vec2 across{0.5 * w * c, -0.5 * w * s};
  std::array<Vec2, 4> corners{{
      {x + along.x + across.x, z + along.z + across.z},
      {x - along.x + across.x, z - along.z + across.z},
      {x - along.x - across.x, z - along.z - across.z},
      {x + along.x - across.x, z + along.z - across.z},
  }};
  if (polygon_area(corners) < 0.0) std::reverse(corners.begin(), corners.end());
  return corners;
}

double Box3D::max_dimension() const { return std::max({l, w, h}); }

double ray_dice_coefficient(const RayObject& gt, const RayObject& pred) {
  const Interval a = ray_interval(gt);
  const Interval b = ray_interval(pred);
  const double inter = interval_overlap(a.lo, a.hi, b.lo, b.hi);
  return 2.0 * inter / (gt.length + pred.length);
}

double ray_iou(const RayObject& gt, const RayObject& pred) {
  const Interval a = ray_interval(gt);
  const Interval b = ray_interval(pred);
  const double inter = interval_overlap(a.lo, a.hi, b.lo, b.hi);
  const double uni = gt.length + pred.length - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double convex_intersection_area(std::span<const Vec2> subject,
                                std::span<const Vec2> clip) {
  // Sutherland-Hodgman.
  std::vector<Vec2> output(subject.begin(), subject.end());
  std::vector<Vec2> input;
  for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const Vec2& a = clip[e];
    const Vec2& b = clip[(e + 1) % clip.size()];
    input.swap(output);
    output.clear();
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Vec2& cur = input[i];
      const Vec2& prev = input[(i + input.size() - 1) % input.size()];
      const bool cur_in = cross(a, b, cur) >= -kCollinearTolerance;
      const bool prev_in = cross(a, b, prev) >= -kCollinearTolerance;
      if (cur_in) {
        if (!prev_in) output.push_back(line_intersection(prev, cur, a, b));
        output.push_back(cur);
      } else if (prev_in) {
        output.push_back(line_intersection(prev, cur, a, b));
      }
    }
  }
  if (output.size() < 3) return 0.0;
  return std::max(0.0, polygon_area(output));
}

namespace {

// Strict weak order on the geometric fields, so that the clipper always sees
// the same (subject, clip) pair whichever way round the caller passes them.
bool geometry_before(const Box3D& a, const Box3D& b) {
  return std::tie(a.x, a.z, a.l, a.w, a.yaw) < std::tie(b.x, b.z, b.l, b.w, b.yaw);
}

}  // namespace

double bev_intersection_area(const Box3D& a_in, const Box3D& b_in) {
  const bool swap = geometry_before(b_in, a_in);
  const Box3D& a = swap ? b_in : a_in;
  const Box3D& b = swap ? a_in : b_in;
  // Disjoint bounding circles short-circuit the clipper.
  const double reach = 0.5 * (std::hypot(a.l, a.w) + std::hypot(b.l, b.w));
  if (std::hypot(a.x - b.x, a.z - b.z) >= reach) return 0.0;
  const auto fa = a.footprint();
  const auto fb = b.footprint();
  return convex_intersection_area(fa, fb);
}

double bev_iou(const Box3D& a, const Box3D& b) {
  const double inter = bev_intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.l * a.w + b.l * b.w - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou3d(const Box3D& a, const Box3D& b) {
  const double vertical = interval_overlap(a.y - 0.5 * a.h, a.y + 0.5 * a.h,
                                           b.y - 0.5 * b.h, b.y + 0.5 * b.h);
  if (vertical <= 0.0) return 0.0;
  const double inter = bev_intersection_area(a, b) * vertical;
  if (inter <= 0.0) return 0.0;
  const double uni = a.volume() + b.volume() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BevGrid::BevGrid(std::size_t rows, std::size_t cols, GridExtent extent)
    : BevGrid(rows, cols, extent, std::vector<double>(rows * cols, 0.0)) {}

BevGrid::BevGrid(std::size_t rows, std::size_t cols, GridExtent extent,
                 std::vector<double> cells)
    : rows_(rows), cols_(cols), extent_(extent), cells_(std::move(cells)) {
  if (rows_ == 0 || cols_ == 0) {
    throw std::invalid_argument("grid needs at least one row and column");
  }
  if (!(extent_.x_max > extent_.x_min) || !(extent_.z_max > extent_.z_min)) {
    throw std::invalid_argument("grid extent is degenerate");
  }
  if (cells_.size() != rows_ * cols_) {
    throw std::invalid_argument("grid cell count does not match shape");
  }
  for (double v : cells_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("grid cell outside [0, 1]");
    }
  }
}

void BevGrid::set(std::size_t row, std::size_t col, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("grid cell outside [0, 1]");
  }
  cells_.at(row * cols_ + col) = value;
}

double BevGrid::sum() const {
  double s = 0.0;
  for (double v : cells_) s += v;
  return s;
}

BevGrid rasterize(std::span<const Box3D> boxes, const BevGrid& grid_template) {
  const std::size_t rows = grid_template.rows();
  const std::size_t cols = grid_template.cols();
  const GridExtent ext = grid_template.extent();
  const double dx = grid_template.cell_size_x();
  const double dz = grid_template.cell_size_z();

  std::vector<std::vector<std::size_t>> touching(rows * cols);
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const auto corners = boxes[b].footprint();
    double x_lo = corners[0].x, x_hi = corners[0].x;
    double z_lo = corners[0].z, z_hi = corners[0].z;
    for (const Vec2& p : corners) {
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      z_lo = std::min(z_lo, p.z);
      z_hi = std::max(z_hi, p.z);
    }
    if (x_hi <= ext.x_min || x_lo >= ext.x_max || z_hi <= ext.z_min ||
        z_lo >= ext.z_max) {
      continue;
    }
    auto first = [](double lo, double origin, double size) {
      return static_cast<std::size_t>(std::max(0.0, std::floor((lo - origin) / size)));
    };
    auto last = [](double hi, double origin, double size, std::size_t n) {
      const double idx = std::ceil((hi - origin) / size) - 1.0;
      return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(n - 1)));
    };
    const std::size_t r0 = first(x_lo, ext.x_min, dx);
    const std::size_t r1 = last(x_hi, ext.x_min, dx, rows);
    const std::size_t c0 = first(z_lo, ext.z_min, dz);
    const std::size_t c1 = last(z_hi, ext.z_min, dz, cols);
    for (std::size_t r = r0; r <= r1 && r < rows; ++r) {
      for (std::size_t c = c0; c <= c1 && c < cols; ++c) {
        touching[r * cols + c].push_back(b);
      }
    }
  }

  std::vector<double> cells(rows * cols, 0.0);
  std::vector<Rect> rects;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& list = touching[r * cols + c];
      if (list.empty()) continue;
      const Rect cell{ext.x_min + r * dx, ext.x_min + (r + 1) * dx,
                      ext.z_min + c * dz, ext.z_min + (c + 1) * dz};
      rects.clear();
      bool exact = true;
      for (std::size_t b : list) {
        const auto rect = axis_aligned_rect(boxes[b]);
        if (!rect) {
          exact = false;
          break;
        }
        rects.push_back(*rect);
      }
      double fraction;
      if (exact) {
        fraction = union_area(rects, cell) / (dx * dz);
      } else {
        int hits = 0;
        for (int i = 0; i < kSupersample; ++i) {
          const double px = cell.x_lo + (i + 0.5) * dx / kSupersample;
          for (int j = 0; j < kSupersample; ++j) {
            const double pz = cell.z_lo + (j + 0.5) * dz / kSupersample;
            const bool inside = std::any_of(list.begin(), list.end(), [&](std::size_t b) {
              return footprint_contains(boxes[b], px, pz);
            });
            if (inside) ++hits;
          }
        }
        fraction = static_cast<double>(hits) / (kSupersample * kSupersample);
      }
      cells[r * cols + c] = std::clamp(fraction, 0.0, 1.0);
    }
  }
  return BevGrid(rows, cols, ext, std::move(cells));
}

double grid_dice(const BevGrid& pred, const BevGrid& gt) {
  if (!pred.same_shape(gt)) {
    throw std::invalid_argument("grid_dice: grids differ in shape or extent");
  }
  double overlap = 0.0;
  double mass = 0.0;
  const auto p = pred.cells();
  const auto g = gt.cells();
  for (std::size_t i = 0; i < p.size(); ++i) {
    overlap += p[i] * g[i];
    mass += p[i] + g[i];
  }
  if (mass == 0.0) return 1.0;
  return std::clamp(2.0 * overlap / mass, 0.0, 1.0);
}

}  // namespace lossbench
