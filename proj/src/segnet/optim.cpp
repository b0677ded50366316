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

#include "fgseg/segnet/optim.hpp"

#include <algorithm>
#include <cmath>

#include "fgseg/error.hpp"

namespace fgseg::segnet {

void rmsprop_step(ModelParams& params, const RmspropConfig& config, double lr) {
  for (Parameter& p : params.parameters()) {
    const bool has_grad = p.value.has_grad();
    const auto g = p.value.grad();
    auto w = p.value.mutable_values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = has_grad ? g[i] : 0.0;
      p.square_avg[i] = config.rho * p.square_avg[i] + (1.0 - config.rho) * gi * gi;
      p.momentum[i] =
          config.momentum * p.momentum[i] + gi / (std::sqrt(p.square_avg[i]) + config.epsilon);
      w[i] -= lr * p.momentum[i] + lr * config.weight_decay * w[i];
    }
    for (double v : w) {
      if (!std::isfinite(v)) throw NumericError("rmsprop produced a non-finite parameter in " + p.name);
    }
  }
}

PlateauScheduler::PlateauScheduler(PlateauConfig config, double lr)
    : config_(config), lr_(lr) {
  if (!(config.factor > 0.0 && config.factor < 1.0)) {
    throw ValueError("plateau factor must lie in (0, 1)");
  }
  if (config.patience < 1) throw ValueError("plateau patience must be >= 1");
}

double PlateauScheduler::step(double value) {
  if (!has_best_ || value < best_ - config_.min_delta) {
    best_ = value;
    has_best_ = true;
    bad_epochs_ = 0;
    return lr_;
  }
  if (++bad_epochs_ >= config_.patience) {
    const double next = std::max(lr_ * config_.factor, config_.min_lr);
    if (next < lr_) ++reductions_;
    lr_ = next;
    bad_epochs_ = 0;
  }
  return lr_;
}

double reduce_lr_on_plateau(std::span<const double> history, double lr,
                            const PlateauConfig& config) {
  PlateauScheduler s(config, lr);
  for (double v : history) s.step(v);
  return s.lr();
}

}  // namespace fgseg::segnet
