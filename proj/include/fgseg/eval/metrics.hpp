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

// Confusion-matrix based segmentation metrics. mIoU and Dice are
// macro-averages over the two vessel classes; background is excluded.

#ifndef FGSEG_EVAL_METRICS_HPP_
#define FGSEG_EVAL_METRICS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "fgseg/dataio/image.hpp"

namespace fgseg::eval {

// counts[truth][prediction].
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, dataio::kNumClasses>, dataio::kNumClasses> counts{};

  // Throws DimensionError on a size mismatch and ValueError on a label
  // outside [0, 3).
  void accumulate(std::span<const std::uint8_t> prediction, std::span<const std::uint8_t> truth);
  void accumulate(const dataio::Image& prediction, const dataio::Image& truth);
  void merge(const ConfusionMatrix& other);

  std::uint64_t total() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

struct MetricsReport {
  std::array<double, dataio::kNumClasses> iou{};
  std::array<double, dataio::kNumClasses> dice{};
  // False for a vessel class with neither truth nor prediction pixels; such
  // classes are left out of the means.
  std::array<bool, dataio::kNumClasses> evaluated{};
  double miou = 0.0;
  double mean_dice = 0.0;
  double pixel_accuracy = 0.0;
  std::uint64_t flops = 0;  // multiply-accumulates per forward pass
  std::size_t samples = 0;
  std::string model_id;
  std::uint64_t seed = 0;
};

// IoU_c = TP/(TP+FP+FN), Dice_c = 2TP/(2TP+FP+FN). If neither vessel class
// can be evaluated both means are 1 (nothing to find, nothing found). Throws
// ValueError for an all-zero matrix.
MetricsReport compute_metrics(const ConfusionMatrix& confusion);

}  // namespace fgseg::eval

#endif  // FGSEG_EVAL_METRICS_HPP_
