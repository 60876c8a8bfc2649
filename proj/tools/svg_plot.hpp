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

#ifndef LOSSBENCH_TOOLS_SVG_PLOT_HPP_
#define LOSSBENCH_TOOLS_SVG_PLOT_HPP_

#include <string>
#include <utility>
#include <vector>

namespace lossbench::cli {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y), x ascending
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  /// Emitted verbatim inside an XML comment before the <svg> element.
  std::vector<std::string> header_lines;
};

/// Line plot with axes, ticks and a legend. Non-positive values are dropped
/// on a log axis.
std::string render_line_plot(const std::vector<Series>& series,
                             const PlotSpec& spec);

}  // namespace lossbench::cli

#endif  // LOSSBENCH_TOOLS_SVG_PLOT_HPP_
