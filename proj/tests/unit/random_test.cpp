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

#include "lossbench/random.hpp"

#include <cmath>

#include "gtest/gtest.h"

namespace lossbench {
namespace {

// Known-answer vectors for Philox4x32-10.
TEST(PhiloxTest, KnownAnswers) {
  EXPECT_EQ(CounterRng::philox({0, 0, 0, 0}, {0, 0}),
            (CounterRng::Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(CounterRng::philox({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                               {0xffffffff, 0xffffffff}),
            (CounterRng::Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(CounterRng::philox({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                               {0xa4093822, 0x299f31d0}),
            (CounterRng::Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRngTest, StreamsArePureFunctionsOfTheirIdentity) {
  CounterRng a(42, 3, 9, 1);
  CounterRng b(42, 3, 9, 1);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
  CounterRng c(42, 3, 9, 2);
  CounterRng d(42, 3, 9, 1);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += c() == d();
  EXPECT_LT(same, 3);
}

TEST(CounterRngTest, UniformAndNormalMoments) {
  CounterRng rng(5, 0, 0, 0);
  const int n = 400'000;
  double su = 0.0, sn = 0.0, sn2 = 0.0, sn4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    sn4 += z * z * z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sn / n, 0.0, 5 / std::sqrt(n));
  EXPECT_NEAR(sn2 / n, 1.0, 5 * std::sqrt(2.0 / n));
  EXPECT_NEAR(sn4 / n, 3.0, 5 * std::sqrt(96.0 / n));
}

TEST(Mix64Test, Scrambles) {
  EXPECT_NE(mix64(0), mix64(1));
  EXPECT_EQ(mix64(123), mix64(123));
}

}  // namespace
}  // namespace lossbench
