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

#include "lossbench/special.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lossbench {

double erf(double x) { return std::erf(x); }

namespace {

// Single-precision-class starting point (M. Giles, "Approximating the erfinv
// function"), refined below.
double erf_inv_initial(double p) {
  double w = -std::log((1.0 - p) * (1.0 + p));
  double r;
  if (w < 5.0) {
    w -= 2.5;
    r = 2.81022636e-08;
    r = 3.43273939e-07 + r * w;
    r = -3.5233877e-06 + r * w;
    r = -4.39150654e-06 + r * w;
    r = 0.00021858087 + r * w;
    r = -0.00125372503 + r * w;
    r = -0.00417768164 + r * w;
    r = 0.246640727 + r * w;
    r = 1.50140941 + r * w;
  } else {
    w = std::sqrt(w) - 3.0;
    r = -0.000200214257;
    r = 0.000100950558 + r * w;
    r = 0.00134934322 + r * w;
    r = -0.00367342844 + r * w;
    r = 0.00573950773 + r * w;
    r = -0.0076224613 + r * w;
    r = 0.00943887047 + r * w;
    r = 1.00167406 + r * w;
    r = 2.83297682 + r * w;
  }
  return r * p;
}

}  // namespace

double erf_inv(double p) {
  if (!(p > -1.0 && p < 1.0)) {
    throw std::domain_error("erf_inv: argument must lie in (-1, 1)");
  }
  if (p == 0.0) return 0.0;
  double x = erf_inv_initial(p);
  // Halley steps on f(x) = erf(x) - p; f' = 2/sqrt(pi) exp(-x^2), f'' = -2x f'.
  for (int i = 0; i < 3; ++i) {
    const double err = std::erf(x) - p;
    const double deriv = std::numbers::inv_sqrtpi * 2.0 * std::exp(-x * x);
    x -= err / (deriv + x * err);
  }
  return x;
}

}  // namespace lossbench
