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

#ifndef FGSEG_TENSOR_GRAD_CHECK_HPP_
#define FGSEG_TENSOR_GRAD_CHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fgseg/tensor/tensor.hpp"

namespace fgseg {

struct GradCheckReport {
  // Per input: max_i |analytic_i - numeric_i| / max(max_i |analytic_i|,
  // max_i |numeric_i|), i.e. a sup-norm relative error. The report keeps the
  // worst input.
  double max_relative_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t elements_checked = 0;
  std::string worst;  // "input <k> element <i>"

  bool passed(double tolerance) const { return max_relative_error < tolerance; }
};

using ScalarFunction = std::function<Tensor(const std::vector<Tensor>&)>;

struct GradCheckOptions {
  double step = 1e-5;
  // Inputs larger than this are checked on a seeded random subset.
  std::size_t max_elements_per_input = std::numeric_limits<std::size_t>::max();
  std::uint64_t seed = 0;
};

// Compares reverse-mode gradients of `fn` (which must return a one-element
// tensor) against central differences for every input with requires_grad.
// Inputs are perturbed in place and restored.
GradCheckReport grad_check(const ScalarFunction& fn, std::vector<Tensor> inputs,
                           const GradCheckOptions& options = {});

}  // namespace fgseg

#endif  // FGSEG_TENSOR_GRAD_CHECK_HPP_
