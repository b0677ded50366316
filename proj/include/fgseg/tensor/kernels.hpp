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

// Raw compute kernels behind the tensor ops.
//
// Two implementations of every hot kernel live here:
//   * `reference::` plain nested loops, serial, written for obviousness. They
//     are the oracle for tests and the baseline for bench/.
//   * `parallel::` im2col + register-blocked GEMM, OpenMP over independent
//     output blocks. Every output element is reduced in a fixed order, so
//     results are bitwise identical for any thread count.
//
// All buffers are dense row-major. Backward kernels accumulate (+=) into
// their gradient outputs; forward kernels overwrite.

#ifndef FGSEG_TENSOR_KERNELS_HPP_
#define FGSEG_TENSOR_KERNELS_HPP_

#include <cstddef>
#include <span>

namespace fgseg::kernels {

struct ConvGeometry {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_height() const { return (height + 2 * padding - kernel) / stride + 1; }
  std::size_t out_width() const { return (width + 2 * padding - kernel) / stride + 1; }
  std::size_t input_size() const { return batch * in_channels * height * width; }
  std::size_t output_size() const { return batch * out_channels * out_height() * out_width(); }
  std::size_t kernel_size() const { return out_channels * in_channels * kernel * kernel; }
};

// Transposed 2x2 convolution with stride 2 (learned upsampling).
// Kernel layout: in_channels x out_channels x 2 x 2.
struct UpsampleGeometry {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t out_channels = 1;

  std::size_t input_size() const { return batch * in_channels * height * width; }
  std::size_t output_size() const { return batch * out_channels * 4 * height * width; }
  std::size_t kernel_size() const { return in_channels * out_channels * 4; }
};

// Gradient buffers may be empty spans, in which case that gradient is skipped.
struct ConvGrads {
  std::span<double> input;
  std::span<double> kernel;
  std::span<double> bias;
};

namespace reference {

void conv2d_forward(const ConvGeometry& g, std::span<const double> input,
                    std::span<const double> kernel, std::span<const double> bias,
                    std::span<double> output);
void conv2d_backward(const ConvGeometry& g, std::span<const double> input,
                     std::span<const double> kernel,
                     std::span<const double> grad_output, ConvGrads grads);

void upsample2_forward(const UpsampleGeometry& g, std::span<const double> input,
                       std::span<const double> kernel, std::span<const double> bias,
                       std::span<double> output);
void upsample2_backward(const UpsampleGeometry& g, std::span<const double> input,
                        std::span<const double> kernel,
                        std::span<const double> grad_output, ConvGrads grads);

// c[rows x cols] = a[rows x inner] * b[inner x cols], for `batch` stacked
// problems.
void matmul(std::size_t batch, std::size_t rows, std::size_t inner, std::size_t cols,
            std::span<const double> a, std::span<const double> b, std::span<double> c);

}  // namespace reference

namespace parallel {

void conv2d_forward(const ConvGeometry& g, std::span<const double> input,
                    std::span<const double> kernel, std::span<const double> bias,
                    std::span<double> output);
void conv2d_backward(const ConvGeometry& g, std::span<const double> input,
                     std::span<const double> kernel,
                     std::span<const double> grad_output, ConvGrads grads);

void upsample2_forward(const UpsampleGeometry& g, std::span<const double> input,
                       std::span<const double> kernel, std::span<const double> bias,
                       std::span<double> output);
void upsample2_backward(const UpsampleGeometry& g, std::span<const double> input,
                        std::span<const double> kernel,
                        std::span<const double> grad_output, ConvGrads grads);

void matmul(std::size_t batch, std::size_t rows, std::size_t inner, std::size_t cols,
            std::span<const double> a, std::span<const double> b, std::span<double> c);

// c[m x n] += a[m x k] * b[k x n]; `trans_a` reads a as stored k x m and
// `trans_b` reads b as stored n x k. Summation order over k is fixed.
void gemm_accumulate(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                     const double* a, std::size_t lda, const double* b,
                     std::size_t ldb, double* c, std::size_t ldc);

}  // namespace parallel

}  // namespace fgseg::kernels

#endif  // FGSEG_TENSOR_KERNELS_HPP_
