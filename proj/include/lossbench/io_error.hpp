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

#ifndef LOSSBENCH_IO_ERROR_HPP_
#define LOSSBENCH_IO_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lossbench {

/// Malformed input. line is 1-based; 0 when not line-oriented. source names
/// the file when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line,
             const std::string& source = "")
      : std::runtime_error((source.empty() ? "" : source + ": ") +
                           (line ? "line " + std::to_string(line) + ": " : "") +
                           message),
        message_(message),
        line_(line) {}

  std::size_t line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  std::size_t line_;
};

/// A file could not be opened or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lossbench

#endif  // LOSSBENCH_IO_ERROR_HPP_
