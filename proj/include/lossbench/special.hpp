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

#ifndef LOSSBENCH_SPECIAL_HPP_
#define LOSSBENCH_SPECIAL_HPP_

namespace lossbench {

/// Gauss error function. Total; odd; absolute error below 1e-12 on |x| <= 6.
double erf(double x);

/// Inverse of erf on the open interval (-1, 1).
///
/// Throws std::domain_error for |p| >= 1 or NaN. Callers computing
/// erf_inv(length^2) must handle length >= 1 themselves.
double erf_inv(double p);

}  // namespace lossbench

#endif  // LOSSBENCH_SPECIAL_HPP_
