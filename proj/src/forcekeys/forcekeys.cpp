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

#include <algorithm>
#include <cmath>
#include <string>

#include "fgseg/error.hpp"

namespace fgseg::forcekeys {

KeyFrameSelection select_key_frames(std::span<const double> magnitudes) {
  if (magnitudes.empty()) throw ValueError("cannot select key frames from an empty trace");
  KeyFrameSelection s;
  s.f_min = s.f_max = magnitudes[0];
  for (std::size_t t = 1; t < magnitudes.size(); ++t) {
    // Strict comparisons keep the earliest index on ties.
    if (magnitudes[t] < s.f_min) {
      s.f_min = magnitudes[t];
      s.idx_min = t;
    }
    if (magnitudes[t] > s.f_max) {
      s.f_max = magnitudes[t];
      s.idx_max = t;
    }
  }
  return s;
}

KeyFrameSelection select_key_frames(const dataio::ForceTrace& trace) {
  const auto m = dataio::magnitudes(trace);
  return select_key_frames(m);
}

std::pair<std::size_t, std::size_t> select_preceding_frames(std::size_t current_index) {
  return {current_index >= 1 ? current_index - 1 : 0, current_index >= 2 ? current_index - 2 : 0};
}

DynamicWeights dynamic_weights(double f_cur, double f_min, double f_max) {
  if (!std::isfinite(f_cur) || !std::isfinite(f_min) || !std::isfinite(f_max)) {
    throw ValueError("dynamic_weights: non-finite force");
  }
  if (f_min > f_max) {
    throw ValueError("dynamic_weights: f_min " + std::to_string(f_min) + " exceeds f_max " +
                     std::to_string(f_max));
  }
  if (f_min == f_max) return {0.5, 0.5};
  const double f = std::clamp(f_cur, f_min, f_max);
  const double w_min = (f - f_min) / (f_max - f_min);
  // Derive w_max from w_min so the pair sums to exactly 1.
  return {w_min, 1.0 - w_min};
}

}  // namespace fgseg::forcekeys
