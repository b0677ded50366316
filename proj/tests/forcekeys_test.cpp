/* Copyright 2026 The fgseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "fgseg/forcekeys/forcekeys.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fgseg/error.hpp"

namespace fgseg::forcekeys {
namespace {

// Straightforward two-pass scan used as the oracle.
KeyFrameSelection brute_force(const std::vector<double>& f) {
  KeyFrameSelection s;
  const double lo = *std::min_element(f.begin(), f.end());
  const double hi = *std::max_element(f.begin(), f.end());
  s.idx_min = static_cast<std::size_t>(std::find(f.begin(), f.end(), lo) - f.begin());
  s.idx_max = static_cast<std::size_t>(std::find(f.begin(), f.end(), hi) - f.begin());
  s.f_min = lo;
  s.f_max = hi;
  return s;
}

TEST(SelectKeyFrames, Examples) {
  const std::vector<double> f{1.0, 4.0, 2.5};
  const auto s = select_key_frames(f);
  EXPECT_EQ(s.idx_min, 0u);
  EXPECT_EQ(s.idx_max, 1u);
  EXPECT_EQ(s.f_min, 1.0);
  EXPECT_EQ(s.f_max, 4.0);

  const std::vector<double> flat{2.0, 2.0, 2.0};
  const auto t = select_key_frames(flat);
  EXPECT_EQ(t.idx_min, 0u);
  EXPECT_EQ(t.idx_max, 0u);
}

TEST(SelectKeyFrames, UsesAbsoluteFz) {
  dataio::ForceTrace trace(3);
  trace[0].fz = -3.0;
  trace[1].fz = 0.5;
  trace[2].fz = 2.0;
  trace[1].fx = 100.0;  // other channels are ignored
  const auto s = select_key_frames(trace);
  EXPECT_EQ(s.idx_min, 1u);
  EXPECT_EQ(s.idx_max, 0u);
  EXPECT_EQ(s.f_max, 3.0);
}

TEST(SelectKeyFrames, EmptyTraceThrows) {
  EXPECT_THROW(select_key_frames(std::vector<double>{}), ValueError);
  EXPECT_THROW(select_key_frames(dataio::ForceTrace{}), ValueError);
}

TEST(SelectKeyFrames, MatchesBruteForceOnRandomTraces) {
  std::mt19937_64 rng(201);
  std::uniform_int_distribution<std::size_t> length(1, 1000);
  std::uniform_int_distribution<int> coarse(0, 20);  // forces ties
  std::uniform_real_distribution<double> fine(0.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> f(length(rng));
    for (double& x : f) x = trial % 2 ? 0.5 * coarse(rng) : fine(rng);
    const auto got = select_key_frames(f);
    const auto want = brute_force(f);
    ASSERT_EQ(got.idx_min, want.idx_min);
    ASSERT_EQ(got.idx_max, want.idx_max);
    ASSERT_EQ(got.f_min, want.f_min);
    ASSERT_EQ(got.f_max, want.f_max);
  }
}

TEST(SelectKeyFrames, InvariantToPositiveScaling) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> f(12), g(12);
    const double a = 0.1 + u(rng);
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = u(rng);
      g[i] = a * f[i];
    }
    const auto s = select_key_frames(f), t = select_key_frames(g);
    EXPECT_EQ(s.idx_min, t.idx_min);
    EXPECT_EQ(s.idx_max, t.idx_max);
  }
}

TEST(SelectPrecedingFrames, ClampsAtZero) {
  using Pair = std::pair<std::size_t, std::size_t>;
  EXPECT_EQ(select_preceding_frames(5), Pair(4, 3));
  EXPECT_EQ(select_preceding_frames(1), Pair(0, 0));
  EXPECT_EQ(select_preceding_frames(0), Pair(0, 0));
  EXPECT_EQ(select_preceding_frames(2), Pair(1, 0));
}

TEST(DynamicWeights, Examples) {
  auto w = dynamic_weights(1.0, 1.0, 5.0);
  EXPECT_EQ(w.w_min, 0.0);
  EXPECT_EQ(w.w_max, 1.0);
  w = dynamic_weights(5.0, 1.0, 5.0);
  EXPECT_EQ(w.w_min, 1.0);
  EXPECT_EQ(w.w_max, 0.0);
  w = dynamic_weights(2.0, 1.0, 5.0);
  EXPECT_DOUBLE_EQ(w.w_min, 0.25);
  EXPECT_DOUBLE_EQ(w.w_max, 0.75);
  w = dynamic_weights(3.0, 3.0, 3.0);
  EXPECT_EQ(w.w_min, 0.5);
  EXPECT_EQ(w.w_max, 0.5);
}

TEST(DynamicWeights, ClampsOutOfRangeCurrentForce) {
  auto w = dynamic_weights(9.0, 1.0, 5.0);
  EXPECT_EQ(w.w_min, 1.0);
  EXPECT_EQ(w.w_max, 0.0);
  w = dynamic_weights(-2.0, 1.0, 5.0);
  EXPECT_EQ(w.w_min, 0.0);
  EXPECT_EQ(w.w_max, 1.0);
}

TEST(DynamicWeights, RejectsInvertedOrNonFiniteRange) {
  EXPECT_THROW(dynamic_weights(2.0, 5.0, 1.0), ValueError);
  EXPECT_THROW(dynamic_weights(std::nan(""), 1.0, 5.0), ValueError);
  EXPECT_THROW(dynamic_weights(2.0, 1.0, std::numeric_limits<double>::infinity()), ValueError);
}

TEST(DynamicWeights, SumToOneAndMonotoneOnRandomTriples) {
  std::mt19937_64 rng(203);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 10000; ++trial) {
    double lo = u(rng), hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const auto wa = dynamic_weights(a, lo, hi), wb = dynamic_weights(b, lo, hi);
    ASSERT_EQ(wa.w_min + wa.w_max, 1.0);
    ASSERT_GE(wa.w_min, 0.0);
    ASSERT_LE(wa.w_min, 1.0);
    ASSERT_GE(wa.w_max, 0.0);
    ASSERT_LE(wa.w_max, 1.0);
    ASSERT_LE(wa.w_min, wb.w_min);
    ASSERT_GE(wa.w_max, wb.w_max);
  }
}

TEST(DynamicWeights, CurrentAtMinimumSuppressesThatKeyFrame) {
  const std::vector<double> f{0.3, 2.0, 4.5, 1.0};
  const auto s = select_key_frames(f);
  EXPECT_EQ(dynamic_weights(f[s.idx_min], s.f_min, s.f_max).w_min, 0.0);
  EXPECT_EQ(dynamic_weights(f[s.idx_max], s.f_min, s.f_max).w_max, 0.0);
}

TEST(DynamicWeights, InvariantToAffineRescaling) {
  std::mt19937_64 rng(204);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    double lo = u(rng), hi = lo + 0.5 + u(rng);
    const double cur = lo + (hi - lo) * u(rng) / 10.0;
    const double a = 0.2 + u(rng), b = u(rng) - 5.0;
    const auto w = dynamic_weights(cur, lo, hi);
    const auto v = dynamic_weights(a * cur + b, a * lo + b, a * hi + b);
    EXPECT_NEAR(w.w_min, v.w_min, 1e-12);
    EXPECT_NEAR(w.w_max, v.w_max, 1e-12);
  }
}

}  // namespace
}  // namespace fgseg::forcekeys
