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

#ifndef LOSSBENCH_BEV_GEOMETRY_HPP_
#define LOSSBENCH_BEV_GEOMETRY_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lossbench {

// Coordinate frame: x is lateral, z is depth along the camera axis, y is
// elevation. The bird's-eye-view plane is x-z. At yaw 0 a box's length runs
// along +z and its width along x.

/// Point in the x-z plane.
struct Vec2 {
  double x;
  double z;
};

/// Maps an angle into (-pi, pi].
double normalize_yaw(double yaw);

/// Oriented 3D box. score is absent for ground truth.
struct Box3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double l = 1.0;
  double w = 1.0;
  double h = 1.0;
  double yaw = 0.0;
  std::string category;
  std::optional<double> score;

  /// Throws std::invalid_argument for non-positive dimensions, non-finite
  /// fields, or a score outside [0, 1].
  void validate() const;

  /// Footprint corners in counter-clockwise order (x-z plane).
  std::array<Vec2, 4> footprint() const;
  double max_dimension() const;
  double volume() const { return l * w * h; }
};

/// An object seen along a single camera ray: center depth and extent.
struct RayObject {
  double depth;
  double length;
};

/// 2 * intersection / (len_a + len_b) of the two depth intervals. For equal
/// lengths this is max(0, l - |eta|) / l.
double ray_dice_coefficient(const RayObject& gt, const RayObject& pred);

/// Intersection over union of the two depth intervals.
double ray_iou(const RayObject& gt, const RayObject& pred);

/// Rotated-rectangle IoU in the x-z plane.
double bev_iou(const Box3D& a, const Box3D& b);

/// Intersection area of two box footprints.
double bev_intersection_area(const Box3D& a, const Box3D& b);

/// BEV intersection times vertical overlap, over the union volume.
double iou3d(const Box3D& a, const Box3D& b);

/// Area of a convex polygon clipped against another (both counter-clockwise).
double convex_intersection_area(std::span<const Vec2> subject,
                                std::span<const Vec2> clip);

struct GridExtent {
  double x_min;
  double x_max;
  double z_min;
  double z_max;

  friend bool operator==(const GridExtent&, const GridExtent&) = default;
};

/// Dense soft-occupancy grid over a metric BEV extent. Rows index x and
/// columns index z, both increasing. Cell values lie in [0, 1].
class BevGrid {
 public:
  BevGrid(std::size_t rows, std::size_t cols, GridExtent extent);
  BevGrid(std::size_t rows, std::size_t cols, GridExtent extent,
          std::vector<double> cells);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const GridExtent& extent() const { return extent_; }
  double cell_size_x() const { return (extent_.x_max - extent_.x_min) / rows_; }
  double cell_size_z() const { return (extent_.z_max - extent_.z_min) / cols_; }

  double at(std::size_t row, std::size_t col) const {
    return cells_[row * cols_ + col];
  }
  /// Throws std::invalid_argument unless value is in [0, 1].
  void set(std::size_t row, std::size_t col, double value);

  std::span<const double> cells() const { return cells_; }
  double sum() const;
  bool same_shape(const BevGrid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ &&
           extent_ == other.extent_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  GridExtent extent_;
  std::vector<double> cells_;
};

/// Fraction of each cell covered by the union of the box footprints.
///
/// Cells touched only by axis-aligned boxes get the exact covered fraction;
/// any cell touched by a rotated box is estimated with 4x4 supersampling.
/// The template supplies shape and extent; its cell values are ignored.
BevGrid rasterize(std::span<const Box3D> boxes, const BevGrid& grid_template);

/// Soft dice 2 sum(p g) / (sum p + sum g). Two empty grids score 1.
/// Throws std::invalid_argument on shape or extent mismatch.
double grid_dice(const BevGrid& pred, const BevGrid& gt);

}  // namespace lossbench

#endif  // LOSSBENCH_BEV_GEOMETRY_HPP_
