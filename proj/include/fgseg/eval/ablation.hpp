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

// The four-row ablation protocol, FLOPs accounting and report files.

#ifndef FGSEG_EVAL_ABLATION_HPP_
#define FGSEG_EVAL_ABLATION_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fgseg/dataio/augment.hpp"
#include "fgseg/dataio/sequence.hpp"
#include "fgseg/eval/metrics.hpp"
#include "fgseg/segnet/model.hpp"
#include "fgseg/segnet/train.hpp"

namespace fgseg::eval {

// c_in * c_out * k^2 * h_out * w_out.
std::uint64_t conv_macs(std::uint64_t c_in, std::uint64_t c_out, std::uint64_t kernel,
                        std::uint64_t h_out, std::uint64_t w_out);

// Multiply-accumulates of one forward pass of the variant on one sample.
std::uint64_t flops_estimate(const segnet::UNetConfig& config, segnet::Variant variant);

struct AblationSpec {
  std::vector<segnet::Variant> variants{std::begin(segnet::kAllVariants),
                                        std::end(segnet::kAllVariants)};
  std::vector<std::uint64_t> seeds{1, 2, 3};
};

struct RunRecord {
  MetricsReport metrics;
  std::vector<segnet::EpochLog> log;
  std::size_t best_epoch = 0;
  segnet::ModelParams best;
};

using RunCallback = std::function<void(segnet::Variant, std::uint64_t seed, const RunRecord&)>;

// Trains every variant for every seed (train.seed is replaced by the run's
// seed, so all variants of one seed see identical data order, augmentation
// and backbone initialisation) and evaluates the best-validation checkpoint
// on the validation videos. Reports come back seed-major, variants in spec
// order.
std::vector<MetricsReport> run_ablation(const AblationSpec& spec,
                                        const std::vector<dataio::Video>& train_videos,
                                        const std::vector<dataio::Video>& val_videos,
                                        const segnet::UNetConfig& model,
                                        const segnet::TrainConfig& train,
                                        const dataio::AugmentConfig& augment,
                                        const RunCallback& on_run = {},
                                        const segnet::EpochCallback& on_epoch = {});

struct VariantSummary {
  std::string variant;
  std::size_t runs = 0;
  double miou_mean = 0.0, miou_std = 0.0;
  double dice_mean = 0.0, dice_std = 0.0;
  std::uint64_t flops = 0;
};

// One entry per variant in order of first appearance; sample standard
// deviation (0 for a single run).
std::vector<VariantSummary> summarize(const std::vector<MetricsReport>& reports);

// <dir>/report.csv ("variant,seed,miou,dice,flops", round-trip precision) and
// <dir>/report.svg (mean mIoU per variant with +-1 std whiskers, axis
// [0, 1]). Both are byte-deterministic. Throws ValueError for an empty list.
void emit_report(const std::vector<MetricsReport>& reports, const std::filesystem::path& dir);

std::string report_csv(const std::vector<MetricsReport>& reports);
std::string report_svg(const std::vector<MetricsReport>& reports);

// Parses a report CSV back into (variant, seed, miou, dice, flops).
std::vector<MetricsReport> read_report_csv(const std::filesystem::path& path);

}  // namespace fgseg::eval

#endif  // FGSEG_EVAL_ABLATION_HPP_
