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

#include "lossbench/grid_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lossbench/io_error.hpp"
#include "lossbench/number_format.hpp"

namespace lossbench {

namespace {

constexpr std::array<char, 4> kMagic{'B', 'E', 'V', 'G'};

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw ParseError("truncated BEVG stream", 0);
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(bytes[i]) << (8 * i);
  }
  return value;
}

double parse_double(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + text + "'", line);
  }
}

}  // namespace

void write_grid_csv(std::ostream& out, const BevGrid& grid) {
  const GridExtent& e = grid.extent();
  out << "# bevgrid rows=" << grid.rows() << " cols=" << grid.cols()
      << " x_min=" << format_number(e.x_min)
      << " x_max=" << format_number(e.x_max)
      << " z_min=" << format_number(e.z_min)
      << " z_max=" << format_number(e.z_max) << '\n';
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      if (c) out << ',';
      out << format_number(grid.at(r, c));
    }
    out << '\n';
  }
}

BevGrid read_grid_csv(std::istream& in) {
  // Other comment lines (run headers) may precede the grid header.
  std::string header;
  std::size_t header_line = 0;
  while (std::getline(in, header)) {
    ++header_line;
    if (header.rfind("# bevgrid", 0) == 0 || header.empty() || header[0] != '#') break;
  }
  if (header.rfind("# bevgrid", 0) != 0) {
    throw ParseError("missing '# bevgrid' header", header_line ? header_line : 1);
  }
  std::size_t rows = 0, cols = 0;
  GridExtent extent{};
  int seen = 0;
  std::istringstream fields(header.substr(9));
  std::string field;
  while (fields >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError("bad header field", header_line);
    const std::string key = field.substr(0, eq);
    const double value = parse_double(field.substr(eq + 1), header_line);
    if (key == "rows") rows = static_cast<std::size_t>(value);
    else if (key == "cols") cols = static_cast<std::size_t>(value);
    else if (key == "x_min") extent.x_min = value;
    else if (key == "x_max") extent.x_max = value;
    else if (key == "z_min") extent.z_min = value;
    else if (key == "z_max") extent.z_max = value;
    else continue;
    ++seen;
  }
  if (seen != 6) throw ParseError("incomplete bevgrid header", header_line);

  std::vector<double> cells;
  cells.reserve(rows * cols);
  std::string line;
  std::size_t line_no = header_line;
  for (std::size_t r = 0; r < rows; ++r) {
    ++line_no;
    if (!std::getline(in, line)) throw ParseError("missing grid row", line_no);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream row(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(row, cell, ',')) {
      cells.push_back(parse_double(cell, line_no));
      ++count;
    }
    if (count != cols) {
      throw ParseError("expected " + std::to_string(cols) + " cells, got " +
                           std::to_string(count),
                       line_no);
    }
  }
  try {
    return BevGrid(rows, cols, extent, std::move(cells));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line_no);
  }
}

void write_grid_binary(std::ostream& out, const BevGrid& grid) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.cols()));
  const GridExtent& e = grid.extent();
  for (double v : {e.x_min, e.x_max, e.z_min, e.z_max}) {
    put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  for (double v : grid.cells()) {
    put_le<std::uint32_t>(out,
                          std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
}

BevGrid read_grid_binary(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ParseError("missing BEVG magic", 0);
  }
  const auto rows = get_le<std::uint32_t>(in);
  const auto cols = get_le<std::uint32_t>(in);
  std::array<double, 4> ext{};
  for (double& v : ext) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
  std::vector<double> cells(static_cast<std::size_t>(rows) * cols);
  for (double& v : cells) {
    v = std::bit_cast<float>(get_le<std::uint32_t>(in));
  }
  try {
    return BevGrid(rows, cols, {ext[0], ext[1], ext[2], ext[3]},
                   std::move(cells));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), 0);
  }
}

void save_grid(const std::filesystem::path& path, const BevGrid& grid) {
  const bool binary = path.extension() == ".bevg";
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  if (binary) {
    write_grid_binary(out, grid);
  } else {
    write_grid_csv(out, grid);
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

BevGrid load_grid(const std::filesystem::path& path) {
  const bool binary = path.extension() == ".bevg";
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return binary ? read_grid_binary(in) : read_grid_csv(in);
}

}  // namespace lossbench
