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

// Serial loop kernels. Kept deliberately naive: these define what the fast
// kernels must compute.

#include "fgseg/tensor/kernels.hpp"

namespace fgseg::kernels::reference {

namespace {

// Input coordinate for output position `o` and kernel tap `t`; returns false
// when the tap falls into the zero padding.
bool source_index(std::size_t o, std::size_t t, const ConvGeometry& g,
                  std::size_t extent, std::size_t& src) {
  const long pos = static_cast<long>(o * g.stride + t) - static_cast<long>(g.padding);
  if (pos < 0 || pos >= static_cast<long>(extent)) return false;
  src = static_cast<std::size_t>(pos);
  return true;
}

}  // namespace

void conv2d_forward(const ConvGeometry& g, std::span<const double> input,
                    std::span<const double> kernel, std::span<const double> bias,
                    std::span<double> output) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), k = g.kernel;
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
          double acc = bias.empty() ? 0.0 : bias[o];
          for (std::size_t c = 0; c < g.in_channels; ++c) {
            for (std::size_t ky = 0; ky < k; ++ky) {
              std::size_t iy;
              if (!source_index(y, ky, g, g.height, iy)) continue;
              for (std::size_t kx = 0; kx < k; ++kx) {
                std::size_t ix;
                if (!source_index(x, kx, g, g.width, ix)) continue;
                acc += kernel[((o * g.in_channels + c) * k + ky) * k + kx] *
                       input[((n * g.in_channels + c) * g.height + iy) * g.width + ix];
              }
            }
          }
          output[((n * g.out_channels + o) * oh + y) * ow + x] = acc;
        }
      }
    }
  }
}

void conv2d_backward(const ConvGeometry& g, std::span<const double> input,
                     std::span<const double> kernel,
                     std::span<const double> grad_output, ConvGrads grads) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), k = g.kernel;
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
          const double gy = grad_output[((n * g.out_channels + o) * oh + y) * ow + x];
          if (!grads.bias.empty()) grads.bias[o] += gy;
          for (std::size_t c = 0; c < g.in_channels; ++c) {
            for (std::size_t ky = 0; ky < k; ++ky) {
              std::size_t iy;
              if (!source_index(y, ky, g, g.height, iy)) continue;
              for (std::size_t kx = 0; kx < k; ++kx) {
                std::size_t ix;
                if (!source_index(x, kx, g, g.width, ix)) continue;
                const std::size_t ki = ((o * g.in_channels + c) * k + ky) * k + kx;
                const std::size_t ii = ((n * g.in_channels + c) * g.height + iy) * g.width + ix;
                if (!grads.kernel.empty()) grads.kernel[ki] += gy * input[ii];
                if (!grads.input.empty()) grads.input[ii] += gy * kernel[ki];
              }
            }
          }
        }
      }
    }
  }
}

void upsample2_forward(const UpsampleGeometry& g, std::span<const double> input,
                       std::span<const double> kernel, std::span<const double> bias,
                       std::span<double> output) {
  const std::size_t oh = 2 * g.height, ow = 2 * g.width;
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
          double acc = bias.empty() ? 0.0 : bias[o];
          const std::size_t iy = y / 2, ix = x / 2, dy = y % 2, dx = x % 2;
          for (std::size_t c = 0; c < g.in_channels; ++c) {
            acc += kernel[((c * g.out_channels + o) * 2 + dy) * 2 + dx] *
                   input[((n * g.in_channels + c) * g.height + iy) * g.width + ix];
          }
          output[((n * g.out_channels + o) * oh + y) * ow + x] = acc;
        }
      }
    }
  }
}

void upsample2_backward(const UpsampleGeometry& g, std::span<const double> input,
                        std::span<const double> kernel,
                        std::span<const double> grad_output, ConvGrads grads) {
  const std::size_t oh = 2 * g.height, ow = 2 * g.width;
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
          const double gy = grad_output[((n * g.out_channels + o) * oh + y) * ow + x];
          if (!grads.bias.empty()) grads.bias[o] += gy;
          const std::size_t iy = y / 2, ix = x / 2, dy = y % 2, dx = x % 2;
          for (std::size_t c = 0; c < g.in_channels; ++c) {
            const std::size_t ki = ((c * g.out_channels + o) * 2 + dy) * 2 + dx;
            const std::size_t ii = ((n * g.in_channels + c) * g.height + iy) * g.width + ix;
            if (!grads.kernel.empty()) grads.kernel[ki] += gy * input[ii];
            if (!grads.input.empty()) grads.input[ii] += gy * kernel[ki];
          }
        }
      }
    }
  }
}

void matmul(std::size_t batch, std::size_t rows, std::size_t inner, std::size_t cols,
            std::span<const double> a, std::span<const double> b, std::span<double> c) {
  for (std::size_t s = 0; s < batch; ++s) {
    const double* as = a.data() + s * rows * inner;
    const double* bs = b.data() + s * inner * cols;
    double* cs = c.data() + s * rows * cols;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (std::size_t p = 0; p < inner; ++p) acc += as[i * inner + p] * bs[p * cols + j];
        cs[i * cols + j] = acc;
      }
    }
  }
}

}  // namespace fgseg::kernels::reference
