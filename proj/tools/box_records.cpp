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

#include "box_records.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "lossbench/io_error.hpp"

namespace lossbench::cli {

namespace {

double number_field(const nlohmann::ordered_json& obj, const char* key,
                    std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(std::string("missing field '") + key + "'", line);
  }
  if (!it->is_number()) {
    throw ParseError(std::string("field '") + key + "' must be a number", line);
  }
  return it->get<double>();
}

std::string string_field(const nlohmann::ordered_json& obj, const char* key,
                         std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(std::string("field '") + key + "' must be a string", line);
  }
  return it->get<std::string>();
}

BoxRecord parse_record(const std::string& text, std::size_t line) {
  nlohmann::ordered_json obj;
  try {
    obj = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line);
  }
  if (!obj.is_object()) throw ParseError("expected a JSON object", line);

  BoxRecord r;
  r.line = line;
  r.frame = string_field(obj, "frame", line);
  r.box.category = string_field(obj, "category", line);
  r.box.x = number_field(obj, "x", line);
  r.box.y = number_field(obj, "y", line);
  r.box.z = number_field(obj, "z", line);
  r.box.l = number_field(obj, "l", line);
  r.box.w = number_field(obj, "w", line);
  r.box.h = number_field(obj, "h", line);
  r.box.yaw = number_field(obj, "yaw", line);
  if (const auto it = obj.find("score"); it != obj.end() && !it->is_null()) {
    r.box.score = number_field(obj, "score", line);
  }
  try {
    r.box.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line);
  }
  r.raw = std::move(obj);
  return r;
}

}  // namespace

std::vector<BoxRecord> read_box_records(std::istream& in) {
  std::vector<BoxRecord> records;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos || text[first] == '#') continue;
    records.push_back(parse_record(text, line));
  }
  if (in.bad()) throw IoError("read failure");
  return records;
}

std::vector<BoxRecord> load_box_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    auto records = read_box_records(in);
    for (BoxRecord& r : records) r.source = path.string();
    return records;
  } catch (const ParseError& e) {
    throw ParseError(e.message(), e.line(), path.string());
  }
}

void write_box_record(std::ostream& out, const BoxRecord& record) {
  nlohmann::ordered_json obj = record.raw;
  obj["frame"] = record.frame;
  obj["category"] = record.box.category;
  obj["x"] = record.box.x;
  obj["y"] = record.box.y;
  obj["z"] = record.box.z;
  obj["l"] = record.box.l;
  obj["w"] = record.box.w;
  obj["h"] = record.box.h;
  obj["yaw"] = record.box.yaw;
  if (record.box.score) {
    obj["score"] = *record.box.score;
  } else {
    obj.erase("score");
  }
  out << obj.dump() << '\n';
}

std::vector<FrameSet> assemble_frames(const std::vector<BoxRecord>& preds,
                                      const std::vector<BoxRecord>& gts) {
  std::vector<FrameSet> frames;
  std::map<std::string, std::size_t> index;
  auto frame_for = [&](const std::string& id) -> FrameSet& {
    auto [it, inserted] = index.try_emplace(id, frames.size());
    if (inserted) frames.push_back({id, {}, {}});
    return frames[it->second];
  };
  for (const BoxRecord& r : preds) {
    if (!r.box.score) throw ParseError("prediction without score", r.line, r.source);
    frame_for(r.frame).predictions.push_back(r.box);
  }
  for (const BoxRecord& r : gts) {
    if (r.box.score) throw ParseError("ground truth must not carry a score", r.line, r.source);
    frame_for(r.frame).ground_truths.push_back(r.box);
  }
  return frames;
}

}  // namespace lossbench::cli
