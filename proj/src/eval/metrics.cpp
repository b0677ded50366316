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

#include "fgseg/eval/metrics.hpp"

#include "fgseg/error.hpp"

namespace fgseg::eval {

void ConfusionMatrix::accumulate(std::span<const std::uint8_t> prediction,
                                 std::span<const std::uint8_t> truth) {
  if (prediction.size() != truth.size()) {
    throw DimensionError("confusion: prediction has " + std::to_string(prediction.size()) +
                         " pixels, truth " + std::to_string(truth.size()));
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (prediction[i] >= dataio::kNumClasses || truth[i] >= dataio::kNumClasses) {
      throw ValueError("confusion: label out of range at pixel " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < truth.size(); ++i) ++counts[truth[i]][prediction[i]];
}

void ConfusionMatrix::accumulate(const dataio::Image& prediction, const dataio::Image& truth) {
  if (prediction.height != truth.height || prediction.width != truth.width) {
    throw DimensionError("confusion: mask sizes differ");
  }
  accumulate(std::span<const std::uint8_t>(prediction.pixels),
             std::span<const std::uint8_t>(truth.pixels));
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  for (std::size_t t = 0; t < dataio::kNumClasses; ++t) {
    for (std::size_t p = 0; p < dataio::kNumClasses; ++p) counts[t][p] += other.counts[t][p];
  }
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts) {
    for (std::uint64_t c : row) n += c;
  }
  return n;
}

MetricsReport compute_metrics(const ConfusionMatrix& confusion) {
  const std::uint64_t total = confusion.total();
  if (total == 0) throw ValueError("cannot compute metrics from an empty confusion matrix");
  MetricsReport r;
  std::uint64_t correct = 0;
  for (std::size_t c = 0; c < dataio::kNumClasses; ++c) {
    const std::uint64_t tp = confusion.counts[c][c];
    std::uint64_t fp = 0, fn = 0;
    for (std::size_t o = 0; o < dataio::kNumClasses; ++o) {
      if (o == c) continue;
      fp += confusion.counts[o][c];
      fn += confusion.counts[c][o];
    }
    correct += tp;
    r.evaluated[c] = tp + fp + fn > 0;
    if (r.evaluated[c]) {
      r.iou[c] = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
      r.dice[c] = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    }
  }
  double iou_sum = 0.0, dice_sum = 0.0;
  int n = 0;
  for (std::size_t c : {std::size_t{dataio::kArtery}, std::size_t{dataio::kVein}}) {
    if (!r.evaluated[c]) continue;
    iou_sum += r.iou[c];
    dice_sum += r.dice[c];
    ++n;
  }
  r.miou = n ? iou_sum / n : 1.0;
  r.mean_dice = n ? dice_sum / n : 1.0;
  r.pixel_accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return r;
}

}  // namespace fgseg::eval
