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

#ifndef LOSSBENCH_TOOLS_BOX_RECORDS_HPP_
#define LOSSBENCH_TOOLS_BOX_RECORDS_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lossbench/bev_geometry.hpp"
#include "lossbench/detection_metrics.hpp"
#include "nlohmann/json.hpp"

namespace lossbench::cli {

/// One JSON-Lines box. A record without "score" is ground truth. The parsed
/// object is kept so that rewriting a record preserves unknown keys.
struct BoxRecord {
  std::string frame;
  Box3D box;
  nlohmann::ordered_json raw;
  std::size_t line = 0;
  std::string source;  // file name, when read from one
};

/// Reads records, skipping blank lines and lines starting with '#'. Throws
/// ParseError with the 1-based line number on malformed input.
std::vector<BoxRecord> read_box_records(std::istream& in);

/// Throws IoError when the file cannot be opened.
std::vector<BoxRecord> load_box_records(const std::filesystem::path& path);

/// Writes the record as one JSON line with the box fields refreshed.
void write_box_record(std::ostream& out, const BoxRecord& record);

/// Groups predictions and ground truths into frames, ordered by first
/// appearance (predictions first). Scored records in gts, or unscored ones in
/// preds, are rejected with their line number.
std::vector<FrameSet> assemble_frames(const std::vector<BoxRecord>& preds,
                                      const std::vector<BoxRecord>& gts);

}  // namespace lossbench::cli

#endif  // LOSSBENCH_TOOLS_BOX_RECORDS_HPP_
