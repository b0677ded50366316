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

#include <algorithm>
#include <cstring>
#include <vector>

#include "fgseg/tensor/kernels.hpp"

namespace fgseg::kernels::parallel {

namespace {

// Register tile and cache blocking for the packed GEMM. The tile is sized for
// 16 vector accumulators; panels keep a kc x nc slice of B in L2.
constexpr std::size_t kTileRows = 8;
constexpr std::size_t kTileCols = 16;
constexpr std::size_t kDepthBlock = 256;
constexpr std::size_t kPanelCols = 512;

// A block packed as [p][kTileRows], zero-padded past `rows`.
void pack_a(bool trans, const double* a, std::size_t lda, std::size_t i0, std::size_t rows,
            std::size_t p0, std::size_t depth, double* dst) {
  for (std::size_t p = 0; p < depth; ++p) {
    double* d = dst + p * kTileRows;
    for (std::size_t r = 0; r < kTileRows; ++r) {
      if (r >= rows) {
        d[r] = 0.0;
      } else {
        d[r] = trans ? a[(p0 + p) * lda + i0 + r] : a[(i0 + r) * lda + p0 + p];
      }
    }
  }
}

// B panel packed as [column tile][p][kTileCols], zero-padded past `cols`.
void pack_b(bool trans, const double* b, std::size_t ldb, std::size_t p0, std::size_t depth,
            std::size_t j0, std::size_t cols, double* dst) {
  const std::size_t tiles = (cols + kTileCols - 1) / kTileCols;
  for (std::size_t t = 0; t < tiles; ++t) {
    double* tile = dst + t * depth * kTileCols;
    const std::size_t c0 = t * kTileCols;
    const std::size_t width = std::min(kTileCols, cols - c0);
    if (!trans) {
      for (std::size_t p = 0; p < depth; ++p) {
        const double* src = b + (p0 + p) * ldb + j0 + c0;
        double* d = tile + p * kTileCols;
        std::size_t c = 0;
        for (; c < width; ++c) d[c] = src[c];
        for (; c < kTileCols; ++c) d[c] = 0.0;
      }
    } else {
      for (std::size_t c = 0; c < kTileCols; ++c) {
        if (c >= width) {
          for (std::size_t p = 0; p < depth; ++p) tile[p * kTileCols + c] = 0.0;
          continue;
        }
        const double* src = b + (j0 + c0 + c) * ldb + p0;
        for (std::size_t p = 0; p < depth; ++p) tile[p * kTileCols + c] = src[p];
      }
    }
  }
}

// Eight doubles per lane group; lowers to one 512-bit or two 256-bit registers.
typedef double Lane __attribute__((vector_size(64), aligned(8)));
constexpr std::size_t kLane = 8;
static_assert(kTileCols % kLane == 0);

inline Lane load_lane(const double* p) { return *reinterpret_cast<const Lane*>(p); }
inline void store_lane(double* p, Lane v) { *reinterpret_cast<Lane*>(p) = v; }

// Full 8 x 16 tile. Named accumulators keep everything in registers; an
// array of vectors indexed in the writeback gets spilled by GCC.
// `ldb` is the distance between consecutive depth rows of the B tile: the
// tile width for packed panels, the matrix stride when B is read in place.
inline void micro_tile_full(std::size_t depth, const double* __restrict ap,
                            const double* __restrict bp, std::size_t ldb, double* c,
                            std::size_t ldc) {
  static_assert(kTileRows == 8 && kTileCols == 2 * kLane);
  Lane c00{}, c01{}, c10{}, c11{}, c20{}, c21{}, c30{}, c31{};
  Lane c40{}, c41{}, c50{}, c51{}, c60{}, c61{}, c70{}, c71{};
  for (std::size_t p = 0; p < depth; ++p) {
    const Lane b0 = load_lane(bp + p * ldb);
    const Lane b1 = load_lane(bp + p * ldb + kLane);
    const double* ar = ap + p * kTileRows;
    c00 += ar[0] * b0; c01 += ar[0] * b1;
    c10 += ar[1] * b0; c11 += ar[1] * b1;
    c20 += ar[2] * b0; c21 += ar[2] * b1;
    c30 += ar[3] * b0; c31 += ar[3] * b1;
    c40 += ar[4] * b0; c41 += ar[4] * b1;
    c50 += ar[5] * b0; c51 += ar[5] * b1;
    c60 += ar[6] * b0; c61 += ar[6] * b1;
    c70 += ar[7] * b0; c71 += ar[7] * b1;
  }
  const Lane acc[kTileRows][2] = {{c00, c01}, {c10, c11}, {c20, c21}, {c30, c31},
                                  {c40, c41}, {c50, c51}, {c60, c61}, {c70, c71}};
  for (std::size_t r = 0; r < kTileRows; ++r) {
    double* crow = c + r * ldc;
    store_lane(crow, load_lane(crow) + acc[r][0]);
    store_lane(crow + kLane, load_lane(crow + kLane) + acc[r][1]);
  }
}

// Edge tiles: the packed panels are zero-padded, so compute the full tile
// into a scratch buffer and add back the valid part.
inline void micro_tile(std::size_t depth, const double* __restrict ap,
                       const double* __restrict bp, std::size_t ldb, double* c,
                       std::size_t ldc, std::size_t rows, std::size_t cols) {
  if (rows == kTileRows && cols == kTileCols) {
    micro_tile_full(depth, ap, bp, ldb, c, ldc);
    return;
  }
  double scratch[kTileRows * kTileCols] = {};
  micro_tile_full(depth, ap, bp, ldb, scratch, kTileCols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) c[r * ldc + j] += scratch[r * kTileCols + j];
  }
}

void gemm_impl(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
               const double* a, std::size_t lda, const double* b, std::size_t ldb,
               double* c, std::size_t ldc) {
  if (m == 0 || n == 0 || k == 0) return;
  thread_local std::vector<double> a_pack, b_pack;
  const std::size_t row_tiles = (m + kTileRows - 1) / kTileRows;
  for (std::size_t p0 = 0; p0 < k; p0 += kDepthBlock) {
    const std::size_t depth = std::min(kDepthBlock, k - p0);
    a_pack.resize(row_tiles * depth * kTileRows);
    for (std::size_t it = 0; it < row_tiles; ++it) {
      const std::size_t i0 = it * kTileRows;
      pack_a(trans_a, a, lda, i0, std::min(kTileRows, m - i0), p0, depth,
             a_pack.data() + it * depth * kTileRows);
    }
    for (std::size_t j0 = 0; j0 < n; j0 += kPanelCols) {
      const std::size_t cols = std::min(kPanelCols, n - j0);
      const std::size_t col_tiles = (cols + kTileCols - 1) / kTileCols;
      // Row-major B is read in place for full column tiles; only transposed
      // B and the ragged last tile go through the packing buffer.
      const std::size_t full_tiles = trans_b ? 0 : cols / kTileCols;
      if (full_tiles < col_tiles) {
        const std::size_t c_pack = full_tiles * kTileCols;
        b_pack.resize((col_tiles - full_tiles) * depth * kTileCols);
        pack_b(trans_b, b, ldb, p0, depth, j0 + c_pack, cols - c_pack, b_pack.data());
      }
      for (std::size_t it = 0; it < row_tiles; ++it) {
        const std::size_t i0 = it * kTileRows;
        const std::size_t rows = std::min(kTileRows, m - i0);
        const double* ap = a_pack.data() + it * depth * kTileRows;
        for (std::size_t jt = 0; jt < col_tiles; ++jt) {
          const std::size_t c0 = jt * kTileCols;
          double* ct = c + i0 * ldc + j0 + c0;
          if (jt < full_tiles) {
            micro_tile(depth, ap, b + p0 * ldb + j0 + c0, ldb, ct, ldc, rows, kTileCols);
          } else {
            micro_tile(depth, ap, b_pack.data() + (jt - full_tiles) * depth * kTileCols,
                       kTileCols, ct, ldc, rows, std::min(kTileCols, cols - c0));
          }
        }
      }
    }
  }
}

bool is_pointwise(const ConvGeometry& g) {
  return g.kernel == 1 && g.stride == 1 && g.padding == 0;
}

// cols[(c*k + ky)*k + kx][y*ow + x]
void im2col(const ConvGeometry& g, const double* image, double* cols) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), k = g.kernel;
  const long pad = static_cast<long>(g.padding);
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    const double* plane = image + c * g.height * g.width;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        double* dst = cols + ((c * k + ky) * k + kx) * oh * ow;
        for (std::size_t y = 0; y < oh; ++y) {
          const long iy = static_cast<long>(y * g.stride + ky) - pad;
          double* drow = dst + y * ow;
          if (iy < 0 || iy >= static_cast<long>(g.height)) {
            std::fill(drow, drow + ow, 0.0);
            continue;
          }
          const double* srow = plane + static_cast<std::size_t>(iy) * g.width;
          for (std::size_t x = 0; x < ow; ++x) {
            const long ix = static_cast<long>(x * g.stride + kx) - pad;
            drow[x] = (ix < 0 || ix >= static_cast<long>(g.width))
                          ? 0.0
                          : srow[static_cast<std::size_t>(ix)];
          }
        }
      }
    }
  }
}

void col2im_accumulate(const ConvGeometry& g, const double* cols, double* image) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), k = g.kernel;
  const long pad = static_cast<long>(g.padding);
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    double* plane = image + c * g.height * g.width;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const double* src = cols + ((c * k + ky) * k + kx) * oh * ow;
        for (std::size_t y = 0; y < oh; ++y) {
          const long iy = static_cast<long>(y * g.stride + ky) - pad;
          if (iy < 0 || iy >= static_cast<long>(g.height)) continue;
          double* drow = plane + static_cast<std::size_t>(iy) * g.width;
          const double* srow = src + y * ow;
          for (std::size_t x = 0; x < ow; ++x) {
            const long ix = static_cast<long>(x * g.stride + kx) - pad;
            if (ix >= 0 && ix < static_cast<long>(g.width)) {
              drow[static_cast<std::size_t>(ix)] += srow[x];
            }
          }
        }
      }
    }
  }
}

}  // namespace

void gemm_accumulate(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
                     std::size_t k, const double* a, std::size_t lda, const double* b,
                     std::size_t ldb, double* c, std::size_t ldc) {
  gemm_impl(trans_a, trans_b, m, n, k, a, lda, b, ldb, c, ldc);
}

void conv2d_forward(const ConvGeometry& g, std::span<const double> input,
                    std::span<const double> kernel, std::span<const double> bias,
                    std::span<double> output) {
  const std::size_t pixels = g.out_height() * g.out_width();
  const std::size_t patch = g.in_channels * g.kernel * g.kernel;
  const std::size_t in_stride = g.in_channels * g.height * g.width;
  const std::size_t out_stride = g.out_channels * pixels;
  const bool pointwise = is_pointwise(g);

#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < g.batch; ++n) {
    std::vector<double> cols;
    const double* b = input.data() + n * in_stride;
    if (!pointwise) {
      cols.resize(patch * pixels);
      im2col(g, b, cols.data());
      b = cols.data();
    }
    double* out = output.data() + n * out_stride;
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      std::fill(out + o * pixels, out + (o + 1) * pixels, bias.empty() ? 0.0 : bias[o]);
    }
    gemm_impl(false, false, g.out_channels, pixels, patch, kernel.data(), patch, b, pixels, out,
                     pixels);
  }
}

void conv2d_backward(const ConvGeometry& g, std::span<const double> input,
                     std::span<const double> kernel,
                     std::span<const double> grad_output, ConvGrads grads) {
  const std::size_t pixels = g.out_height() * g.out_width();
  const std::size_t patch = g.in_channels * g.kernel * g.kernel;
  const std::size_t in_stride = g.in_channels * g.height * g.width;
  const std::size_t out_stride = g.out_channels * pixels;
  const bool pointwise = is_pointwise(g);

  if (!grads.bias.empty()) {
#pragma omp parallel for schedule(static)
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      double acc = 0.0;
      for (std::size_t n = 0; n < g.batch; ++n) {
        const double* gy = grad_output.data() + n * out_stride + o * pixels;
        for (std::size_t p = 0; p < pixels; ++p) acc += gy[p];
      }
      grads.bias[o] += acc;
    }
  }

  if (!grads.input.empty()) {
#pragma omp parallel for schedule(static)
    for (std::size_t n = 0; n < g.batch; ++n) {
      const double* gy = grad_output.data() + n * out_stride;
      double* gx = grads.input.data() + n * in_stride;
      if (pointwise) {
        gemm_impl(true, false, patch, pixels, g.out_channels, kernel.data(), patch, gy, pixels, gx,
                        pixels);
      } else {
        std::vector<double> dcols(patch * pixels, 0.0);
        gemm_impl(true, false, patch, pixels, g.out_channels, kernel.data(), patch, gy, pixels,
                        dcols.data(), pixels);
        col2im_accumulate(g, dcols.data(), gx);
      }
    }
  }

  if (!grads.kernel.empty()) {
    // Images are summed in index order; the output-channel split keeps each
    // kernel-gradient element on one thread.
    const std::size_t tiles = (g.out_channels + kTileRows - 1) / kTileRows;
    std::vector<double> cols(pointwise ? 0 : patch * pixels);
    for (std::size_t n = 0; n < g.batch; ++n) {
      const double* src = input.data() + n * in_stride;
      if (!pointwise) {
        im2col(g, src, cols.data());
        src = cols.data();
      }
#pragma omp parallel for schedule(static)
      for (std::size_t t = 0; t < tiles; ++t) {
        const std::size_t o0 = t * kTileRows;
        const std::size_t rows = std::min(kTileRows, g.out_channels - o0);
        gemm_impl(false, true, rows, patch, pixels,
                  grad_output.data() + n * out_stride + o0 * pixels, pixels, src, pixels,
                  grads.kernel.data() + o0 * patch, patch);
      }
    }
  }
}

void upsample2_forward(const UpsampleGeometry& g, std::span<const double> input,
                       std::span<const double> kernel, std::span<const double> bias,
                       std::span<double> output) {
  const std::size_t pixels = g.height * g.width;
  const std::size_t taps = g.out_channels * 4;
  const std::size_t ow = 2 * g.width;

#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < g.batch; ++n) {
    std::vector<double> tmp(taps * pixels, 0.0);
    gemm_impl(true, false, taps, pixels, g.in_channels, kernel.data(), taps,
                    input.data() + n * g.in_channels * pixels, pixels, tmp.data(), pixels);
    double* out = output.data() + n * g.out_channels * 4 * pixels;
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      const double b = bias.empty() ? 0.0 : bias[o];
      for (std::size_t d = 0; d < 4; ++d) {
        const double* src = tmp.data() + (o * 4 + d) * pixels;
        const std::size_t dy = d / 2, dx = d % 2;
        for (std::size_t y = 0; y < g.height; ++y) {
          double* drow = out + (o * 2 * g.height + 2 * y + dy) * ow + dx;
          for (std::size_t x = 0; x < g.width; ++x) drow[2 * x] = src[y * g.width + x] + b;
        }
      }
    }
  }
}

void upsample2_backward(const UpsampleGeometry& g, std::span<const double> input,
                        std::span<const double> kernel,
                        std::span<const double> grad_output, ConvGrads grads) {
  const std::size_t pixels = g.height * g.width;
  const std::size_t taps = g.out_channels * 4;
  const std::size_t ow = 2 * g.width;

  // Gather the output gradient into tap-major layout: [(o, dy, dx)][y*w + x].
  std::vector<double> gathered(g.batch * taps * pixels);
#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < g.batch; ++n) {
    const double* gy = grad_output.data() + n * g.out_channels * 4 * pixels;
    double* dst = gathered.data() + n * taps * pixels;
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      for (std::size_t d = 0; d < 4; ++d) {
        const std::size_t dy = d / 2, dx = d % 2;
        double* drow = dst + (o * 4 + d) * pixels;
        for (std::size_t y = 0; y < g.height; ++y) {
          const double* srow = gy + (o * 2 * g.height + 2 * y + dy) * ow + dx;
          for (std::size_t x = 0; x < g.width; ++x) drow[y * g.width + x] = srow[2 * x];
        }
      }
    }
  }

  if (!grads.bias.empty()) {
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      double acc = 0.0;
      for (std::size_t n = 0; n < g.batch; ++n) {
        const double* src = gathered.data() + n * taps * pixels + o * 4 * pixels;
        for (std::size_t p = 0; p < 4 * pixels; ++p) acc += src[p];
      }
      grads.bias[o] += acc;
    }
  }

  if (!grads.input.empty()) {
#pragma omp parallel for schedule(static)
    for (std::size_t n = 0; n < g.batch; ++n) {
      gemm_impl(false, false, g.in_channels, pixels, taps, kernel.data(), taps,
                       gathered.data() + n * taps * pixels, pixels,
                       grads.input.data() + n * g.in_channels * pixels, pixels);
    }
  }

  if (!grads.kernel.empty()) {
    const std::size_t tiles = (g.in_channels + kTileRows - 1) / kTileRows;
    for (std::size_t n = 0; n < g.batch; ++n) {
#pragma omp parallel for schedule(static)
      for (std::size_t t = 0; t < tiles; ++t) {
        const std::size_t c0 = t * kTileRows;
        const std::size_t rows = std::min(kTileRows, g.in_channels - c0);
        gemm_impl(false, true, rows, taps, pixels,
                  input.data() + n * g.in_channels * pixels + c0 * pixels, pixels,
                  gathered.data() + n * taps * pixels, pixels, grads.kernel.data() + c0 * taps,
                  taps);
      }
    }
  }
}

void matmul(std::size_t batch, std::size_t rows, std::size_t inner, std::size_t cols,
            std::span<const double> a, std::span<const double> b, std::span<double> c) {
#pragma omp parallel for schedule(static)
  for (std::size_t s = 0; s < batch; ++s) {
    double* cs = c.data() + s * rows * cols;
    std::fill(cs, cs + rows * cols, 0.0);
    gemm_impl(false, false, rows, cols, inner, a.data() + s * rows * inner, inner,
                     b.data() + s * inner * cols, cols, cs, cols);
  }
}

}  // namespace fgseg::kernels::parallel
