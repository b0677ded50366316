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

// Differentiable operations. Every function validates shapes, throws
// DimensionError on mismatch, and records a backward closure when gradient
// recording is on.

#ifndef FGSEG_TENSOR_OPS_HPP_
#define FGSEG_TENSOR_OPS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fgseg/tensor/tensor.hpp"

namespace fgseg {

// input N x C x H x W, kernel O x C x k x k (k in {1,2,3}), bias O or
// undefined. stride in {1,2}.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              std::size_t stride = 1, std::size_t padding = 0);

// Learned 2x upsampling: transposed 2x2 convolution with stride 2.
// input N x C x H x W, kernel C x O x 2 x 2, bias O or undefined.
Tensor upsample2(const Tensor& input, const Tensor& kernel, const Tensor& bias);

// 2x2 max pooling over the last two axes; both must be even. The gradient
// goes to the first maximum of each window (row-major scan).
Tensor max_pool2(const Tensor& input);

Tensor relu(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

// Multiplies every slice x[i0, ..., i_{r-1}, ...] by factors[i0, ..., i_{r-1}]
// where r = factors.rank() and factors.shape() is a prefix of x.shape().
Tensor scale_leading(const Tensor& x, const Tensor& factors);

// Max-subtracted softmax along `axis`.
Tensor softmax(const Tensor& x, std::size_t axis);

// R x K times K x C, or batched B x R x K times B x K x C.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& order);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Class-weighted cross-entropy over N x C x H x W logits and N*H*W labels,
// normalized by the total weight of the labelled pixels:
//   sum_i w[y_i] * -log softmax(logits_i)[y_i] / sum_i w[y_i]
Tensor weighted_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> labels,
                              std::span<const double> class_weights);

}  // namespace fgseg

#endif  // FGSEG_TENSOR_OPS_HPP_
