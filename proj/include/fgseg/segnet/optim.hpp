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

#ifndef FGSEG_SEGNET_OPTIM_HPP_
#define FGSEG_SEGNET_OPTIM_HPP_

#include <cstddef>
#include <span>

#include "fgseg/segnet/model.hpp"

namespace fgseg::segnet {

struct RmspropConfig {
  double rho = 0.99;
  double epsilon = 1e-8;
  double momentum = 0.9;
  double weight_decay = 1e-8;
};

// For every parameter p with gradient g:
//   a   <- rho * a + (1 - rho) * g^2
//   buf <- momentum * buf + g / (sqrt(a) + eps)
//   p   <- p - lr * buf - lr * weight_decay * p
// The decay term uses the pre-update p and bypasses the adaptive scaling.
// Parameters without a gradient count as g = 0.
void rmsprop_step(ModelParams& params, const RmspropConfig& config, double lr);

struct PlateauConfig {
  std::size_t patience = 5;
  double factor = 0.5;
  double min_delta = 1e-4;
  double min_lr = 0.0;
};

// Tracks the best (lowest) monitored value. An epoch improves when its value
// is below best - min_delta; after `patience` consecutive epochs without
// improvement the rate is multiplied by `factor` and the counter restarts.
class PlateauScheduler {
 public:
  PlateauScheduler(PlateauConfig config, double lr);

  // Feeds one epoch's value and returns the rate for the next epoch.
  double step(double value);
  double lr() const { return lr_; }
  std::size_t reductions() const { return reductions_; }

 private:
  PlateauConfig config_;
  double lr_;
  double best_ = 0.0;
  bool has_best_ = false;
  std::size_t bad_epochs_ = 0;
  std::size_t reductions_ = 0;
};

// Replays `history` through a fresh scheduler and returns the final rate.
double reduce_lr_on_plateau(std::span<const double> history, double lr,
                            const PlateauConfig& config);

}  // namespace fgseg::segnet

#endif  // FGSEG_SEGNET_OPTIM_HPP_
