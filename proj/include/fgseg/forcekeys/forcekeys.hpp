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

// Key-frame selection from probe force and the force-based weights that
// scale each key frame's contribution.

#ifndef FGSEG_FORCEKEYS_FORCEKEYS_HPP_
#define FGSEG_FORCEKEYS_FORCEKEYS_HPP_

#include <cstddef>
#include <span>
#include <utility>

#include "fgseg/dataio/force.hpp"

namespace fgseg::forcekeys {

struct KeyFrameSelection {
  std::size_t idx_min = 0;
  std::size_t idx_max = 0;
  double f_min = 0.0;
  double f_max = 0.0;
};

struct DynamicWeights {
  double w_min = 0.5;
  double w_max = 0.5;
};

// argmin / argmax of the magnitudes; ties go to the earliest index. Throws
// ValueError on an empty input.
KeyFrameSelection select_key_frames(std::span<const double> magnitudes);
KeyFrameSelection select_key_frames(const dataio::ForceTrace& trace);

// The two frames immediately before `current_index`, clamped at 0.
std::pair<std::size_t, std::size_t> select_preceding_frames(std::size_t current_index);

// w_min = (f_cur - f_min) / (f_max - f_min), w_max = (f_max - f_cur) /
// (f_max - f_min), with f_cur clamped to [f_min, f_max] first and (0.5, 0.5)
// when f_min == f_max. Throws ValueError if f_min > f_max or any input is not
// finite.
DynamicWeights dynamic_weights(double f_cur, double f_min, double f_max);

}  // namespace fgseg::forcekeys

#endif  // FGSEG_FORCEKEYS_FORCEKEYS_HPP_
