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

#ifndef LOSSBENCH_GRID_IO_HPP_
#define LOSSBENCH_GRID_IO_HPP_

#include <filesystem>
#include <iosfwd>

#include "lossbench/bev_geometry.hpp"

namespace lossbench {

// Dense CSV: a header line
//   # bevgrid rows=R cols=C x_min=.. x_max=.. z_min=.. z_max=..
// followed by R lines of C comma-separated values, row-major.
void write_grid_csv(std::ostream& out, const BevGrid& grid);
BevGrid read_grid_csv(std::istream& in);

// Binary, little-endian: "BEVG", u32 rows, u32 cols, f64 x_min, x_max,
// z_min, z_max, then rows*cols f32 cells row-major.
void write_grid_binary(std::ostream& out, const BevGrid& grid);
BevGrid read_grid_binary(std::istream& in);

/// Dispatches on extension: ".bevg" is binary, anything else CSV.
void save_grid(const std::filesystem::path& path, const BevGrid& grid);
BevGrid load_grid(const std::filesystem::path& path);

}  // namespace lossbench

#endif  // LOSSBENCH_GRID_IO_HPP_
