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

#ifndef LOSSBENCH_TOOLS_CLI_HPP_
#define LOSSBENCH_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace lossbench::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitOutput = 3;
inline constexpr int kExitInput = 4;

std::string version();

/// Runs one command; args excludes the program name. Reports go to out
/// unless --out names a file, diagnostics to err. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace lossbench::cli

#endif  // LOSSBENCH_TOOLS_CLI_HPP_
