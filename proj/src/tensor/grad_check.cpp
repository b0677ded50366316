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

#include "fgseg/tensor/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fgseg/error.hpp"

namespace fgseg {

GradCheckReport grad_check(const ScalarFunction& fn, std::vector<Tensor> inputs,
                           const GradCheckOptions& options) {
  for (Tensor& t : inputs) {
    if (t.requires_grad()) t.zero_grad();
  }
  {
    Tensor loss = fn(inputs);
    if (loss.numel() != 1) throw DimensionError("grad_check: function must return a scalar");
    loss.backward();
  }

  auto evaluate = [&]() {
    NoGradGuard no_grad;
    return fn(inputs).item();
  };

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Tensor& t = inputs[k];
    if (!t.requires_grad()) continue;
    const std::size_t n = t.numel();
    std::vector<double> analytic(n, 0.0);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());

    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    if (n > options.max_elements_per_input) {
      std::shuffle(indices.begin(), indices.end(), rng);
      indices.resize(options.max_elements_per_input);
      std::sort(indices.begin(), indices.end());
    }

    auto values = t.mutable_values();
    double worst_diff = 0.0, scale = 0.0;
    std::size_t worst_index = 0;
    for (std::size_t i : indices) {
      const double original = values[i];
      values[i] = original + options.step;
      const double plus = evaluate();
      values[i] = original - options.step;
      const double minus = evaluate();
      values[i] = original;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double diff = std::abs(numeric - analytic[i]);
      if (diff > worst_diff) {
        worst_diff = diff;
        worst_index = i;
      }
      scale = std::max({scale, std::abs(numeric), std::abs(analytic[i])});
    }
    report.elements_checked += indices.size();
    report.max_abs_error = std::max(report.max_abs_error, worst_diff);
    const double rel = scale > 0.0 ? worst_diff / scale : worst_diff;
    if (rel >= report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst = "input " + std::to_string(k) + " element " + std::to_string(worst_index);
    }
  }
  return report;
}

}  // namespace fgseg
