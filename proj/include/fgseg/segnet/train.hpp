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

// Sample assembly, evaluation and the training loop.

#ifndef FGSEG_SEGNET_TRAIN_HPP_
#define FGSEG_SEGNET_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "fgseg/dataio/augment.hpp"
#include "fgseg/dataio/sequence.hpp"
#include "fgseg/eval/metrics.hpp"
#include "fgseg/forcekeys/forcekeys.hpp"
#include "fgseg/segnet/model.hpp"
#include "fgseg/segnet/optim.hpp"

namespace fgseg::segnet {

struct TrainConfig {
  double learning_rate = 1e-3;
  RmspropConfig rmsprop;
  PlateauConfig plateau;
  std::size_t batch_size = 4;
  std::size_t max_epochs = 120;
  // Training samples drawn per epoch from a fresh seeded shuffle of all
  // (video, frame) pairs; 0 uses every pair once.
  std::size_t samples_per_epoch = 0;
  std::vector<double> class_weights{1.0, 30.7, 23.1};
  std::uint64_t seed = 0;

  void validate(std::size_t num_classes) const;
};

// Frame `t` of `video` with the key frames the variant calls for: the
// minimum/maximum |fz| frames, or the two preceding frames for
// fg_wo_kfs_fbw. f_min / f_max are always the video's force extremes.
dataio::Sample make_sample(const dataio::Video& video, std::size_t t, Variant variant);

forcekeys::DynamicWeights sample_weights(const dataio::Sample& sample, Variant variant);

struct Batch {
  FgInput input;                     // key frames/weights unused by the baseline
  std::vector<std::uint8_t> labels;  // N*H*W
};

// Frames are scaled to [0, 1].
Batch make_batch(const std::vector<dataio::Sample>& samples, Variant variant);

// Logits for a batch under the variant's forward function.
Tensor forward(const Batch& batch, const ModelParams& params, const UNetConfig& config,
               Variant variant);

struct Evaluation {
  double loss = 0.0;  // class-weighted cross-entropy pooled over all pixels
  eval::ConfusionMatrix confusion;
  std::size_t frames = 0;
};

// Every frame of every video, without augmentation or gradient recording.
// Each video's frames are encoded once and shared as current and key frames.
Evaluation evaluate(const ModelParams& params, const UNetConfig& config, Variant variant,
                    const std::vector<dataio::Video>& videos,
                    const std::vector<double>& class_weights);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // NaN for epoch 0 (initial parameters)
  double val_loss = 0.0;
  double miou = 0.0;
  double dice = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  ModelParams best;          // lowest validation loss, earliest on ties
  std::size_t best_epoch = 0;
  std::vector<EpochLog> log; // epoch 0 evaluates the initial parameters
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Deterministic for a given seed. Epoch 0 is an evaluation of the
// initialisation, so max_epochs = 0 returns the initial parameters.
TrainResult train(const std::vector<dataio::Video>& train_videos,
                  const std::vector<dataio::Video>& val_videos, const UNetConfig& model,
                  const TrainConfig& config, const dataio::AugmentConfig& augment,
                  Variant variant, const EpochCallback& on_epoch = {});

// One optimisation step on a batch; returns the loss before the update.
double train_step(ModelParams& params, const Batch& batch, const UNetConfig& model,
                  const TrainConfig& config, Variant variant, double lr);

// CSV with header "epoch,train_loss,val_loss,miou,dice,lr"; values use
// round-trip precision.
void write_epoch_log(const std::filesystem::path& path, const std::vector<EpochLog>& log);
std::vector<EpochLog> read_epoch_log(const std::filesystem::path& path);

}  // namespace fgseg::segnet

#endif  // FGSEG_SEGNET_TRAIN_HPP_
