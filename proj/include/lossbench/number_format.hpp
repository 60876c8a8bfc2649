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

#ifndef LOSSBENCH_NUMBER_FORMAT_HPP_
#define LOSSBENCH_NUMBER_FORMAT_HPP_

#include <string>

namespace lossbench {

/// Locale-independent shortest general form with 9 significant digits.
std::string format_number(double value);

}  // namespace lossbench

#endif  // LOSSBENCH_NUMBER_FORMAT_HPP_
