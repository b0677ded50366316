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

#include "fgseg/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fgseg/error.hpp"
#include "fgseg/tensor/kernels.hpp"

namespace fgseg {

namespace {

using detail::Node;

std::span<double> grad_or_empty(Node& n) {
  if (!n.requires_grad) return {};
  return n.ensure_grad();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                      to_string(a.shape()) + " vs " + to_string(b.shape()));
}

std::size_t product(const Shape& s, std::size_t begin, std::size_t end) {
  std::size_t p = 1;
  for (std::size_t i = begin; i < end; ++i) p *= s[i];
  return p;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              std::size_t stride, std::size_t padding) {
  require(input.rank() == 4, "conv2d: input must be N x C x H x W, got " +
                                 to_string(input.shape()));
  require(kernel.rank() == 4, "conv2d: kernel must be O x C x k x k, got " +
                                  to_string(kernel.shape()));
  const Shape& is = input.shape();
  const Shape& ks = kernel.shape();
  require(ks[1] == is[1], "conv2d: kernel expects " + std::to_string(ks[1]) +
                              " input channels, input has " + std::to_string(is[1]));
  require(ks[2] == ks[3] && ks[2] >= 1 && ks[2] <= 3,
          "conv2d: kernel must be square with k in {1,2,3}, got " + to_string(ks));
  if (stride != 1 && stride != 2) throw ValueError("conv2d: stride must be 1 or 2");
  if (bias.defined()) {
    require(bias.shape() == Shape{ks[0]}, "conv2d: bias shape " + to_string(bias.shape()) +
                                              " does not match " + std::to_string(ks[0]) +
                                              " output channels");
  }
  require(is[2] + 2 * padding >= ks[2] && is[3] + 2 * padding >= ks[3],
          "conv2d: kernel larger than padded input");

  kernels::ConvGeometry g;
  g.batch = is[0];
  g.in_channels = is[1];
  g.height = is[2];
  g.width = is[3];
  g.out_channels = ks[0];
  g.kernel = ks[2];
  g.stride = stride;
  g.padding = padding;

  std::vector<double> out(g.output_size());
  std::span<const double> bias_values;
  if (bias.defined()) bias_values = bias.values();
  kernels::parallel::conv2d_forward(g, input.values(), kernel.values(), bias_values, out);

  std::vector<Tensor> inputs{input, kernel};
  if (bias.defined()) inputs.push_back(bias);
  const bool has_bias = bias.defined();
  return Tensor::make_result(
      {g.batch, g.out_channels, g.out_height(), g.out_width()}, std::move(out), inputs,
      "conv2d", [g, has_bias](Node& self) {
        Node& in = *self.parents[0];
        Node& k = *self.parents[1];
        kernels::ConvGrads grads{grad_or_empty(in), grad_or_empty(k), {}};
        if (has_bias) grads.bias = grad_or_empty(*self.parents[2]);
        kernels::parallel::conv2d_backward(g, in.data, k.data, self.grad, grads);
      });
}

Tensor upsample2(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  require(input.rank() == 4, "upsample2: input must be N x C x H x W, got " +
                                 to_string(input.shape()));
  const Shape& is = input.shape();
  const Shape& ks = kernel.shape();
  require(kernel.rank() == 4 && ks[0] == is[1] && ks[2] == 2 && ks[3] == 2,
          "upsample2: kernel must be C x O x 2 x 2 with C = " + std::to_string(is[1]) +
              ", got " + to_string(ks));
  if (bias.defined()) {
    require(bias.shape() == Shape{ks[1]}, "upsample2: bias shape mismatch");
  }
  kernels::UpsampleGeometry g;
  g.batch = is[0];
  g.in_channels = is[1];
  g.height = is[2];
  g.width = is[3];
  g.out_channels = ks[1];

  std::vector<double> out(g.output_size());
  std::span<const double> bias_values;
  if (bias.defined()) bias_values = bias.values();
  kernels::parallel::upsample2_forward(g, input.values(), kernel.values(), bias_values, out);

  std::vector<Tensor> inputs{input, kernel};
  if (bias.defined()) inputs.push_back(bias);
  const bool has_bias = bias.defined();
  return Tensor::make_result(
      {g.batch, g.out_channels, 2 * g.height, 2 * g.width}, std::move(out), inputs,
      "upsample2", [g, has_bias](Node& self) {
        Node& in = *self.parents[0];
        Node& k = *self.parents[1];
        kernels::ConvGrads grads{grad_or_empty(in), grad_or_empty(k), {}};
        if (has_bias) grads.bias = grad_or_empty(*self.parents[2]);
        kernels::parallel::upsample2_backward(g, in.data, k.data, self.grad, grads);
      });
}

Tensor max_pool2(const Tensor& input) {
  require(input.rank() >= 2, "max_pool2: need at least two axes");
  const Shape& s = input.shape();
  const std::size_t h = s[s.size() - 2], w = s[s.size() - 1];
  require(h % 2 == 0 && w % 2 == 0,
          "max_pool2: spatial extents must be even, got " + to_string(s));
  const std::size_t planes = product(s, 0, s.size() - 2);
  const std::size_t oh = h / 2, ow = w / 2;

  std::vector<double> out(planes * oh * ow);
  std::vector<std::size_t> argmax(out.size());
  const auto x = input.values();
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        std::size_t best = p * h * w + (2 * y) * w + 2 * xx;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = p * h * w + (2 * y + dy) * w + 2 * xx + dx;
            if (x[idx] > x[best]) best = idx;
          }
        }
        const std::size_t o = (p * oh + y) * ow + xx;
        out[o] = x[best];
        argmax[o] = best;
      }
    }
  }
  Shape out_shape = s;
  out_shape[s.size() - 2] = oh;
  out_shape[s.size() - 1] = ow;
  return Tensor::make_result(std::move(out_shape), std::move(out), {input}, "max_pool2",
                             [argmax = std::move(argmax)](Node& self) {
                               Node& in = *self.parents[0];
                               if (!in.requires_grad) return;
                               auto& g = in.ensure_grad();
                               for (std::size_t i = 0; i < argmax.size(); ++i) {
                                 g[argmax[i]] += self.grad[i];
                               }
                             });
}

Tensor relu(const Tensor& x) {
  const auto v = x.values();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  return Tensor::make_result(x.shape(), std::move(out), {x}, "relu", [](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (in.data[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, "add", [](Node& self) {
    self.parents[0]->accumulate(self.grad);
    self.parents[1]->accumulate(self.grad);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const auto av = a.values(), bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, "mul", [](Node& self) {
    Node& l = *self.parents[0];
    Node& r = *self.parents[1];
    if (l.requires_grad) {
      auto& g = l.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * r.data[i];
    }
    if (r.requires_grad) {
      auto& g = r.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * l.data[i];
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  const auto v = x.values();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * factor;
  return Tensor::make_result(x.shape(), std::move(out), {x}, "scale", [factor](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

Tensor scale_leading(const Tensor& x, const Tensor& factors) {
  const Shape& xs = x.shape();
  const Shape& fs = factors.shape();
  require(fs.size() <= xs.size() && std::equal(fs.begin(), fs.end(), xs.begin()),
          "scale_leading: factor shape " + to_string(fs) + " is not a prefix of " +
              to_string(xs));
  const std::size_t groups = factors.numel();
  const std::size_t block = groups == 0 ? 0 : x.numel() / groups;
  const auto v = x.values(), f = factors.values();
  std::vector<double> out(v.size());
  for (std::size_t gi = 0; gi < groups; ++gi) {
    for (std::size_t i = 0; i < block; ++i) out[gi * block + i] = v[gi * block + i] * f[gi];
  }
  return Tensor::make_result(xs, std::move(out), {x, factors}, "scale_leading",
                             [groups, block](Node& self) {
                               Node& in = *self.parents[0];
                               Node& fac = *self.parents[1];
                               if (in.requires_grad) {
                                 auto& g = in.ensure_grad();
                                 for (std::size_t gi = 0; gi < groups; ++gi) {
                                   for (std::size_t i = 0; i < block; ++i) {
                                     g[gi * block + i] += self.grad[gi * block + i] * fac.data[gi];
                                   }
                                 }
                               }
                               if (fac.requires_grad) {
                                 auto& g = fac.ensure_grad();
                                 for (std::size_t gi = 0; gi < groups; ++gi) {
                                   double acc = 0.0;
                                   for (std::size_t i = 0; i < block; ++i) {
                                     acc += self.grad[gi * block + i] * in.data[gi * block + i];
                                   }
                                   g[gi] += acc;
                                 }
                               }
                             });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const Shape& s = x.shape();
  require(axis < s.size(), "softmax: axis " + std::to_string(axis) + " invalid for " +
                               to_string(s));
  const std::size_t outer = product(s, 0, axis);
  const std::size_t extent = s[axis];
  const std::size_t inner = product(s, axis + 1, s.size());
  const auto v = x.values();
  std::vector<double> out(v.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * extent * inner + i;
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < extent; ++a) top = std::max(top, v[base + a * inner]);
      double total = 0.0;
      for (std::size_t a = 0; a < extent; ++a) {
        const double e = std::exp(v[base + a * inner] - top);
        out[base + a * inner] = e;
        total += e;
      }
      for (std::size_t a = 0; a < extent; ++a) out[base + a * inner] /= total;
    }
  }
  return Tensor::make_result(s, std::move(out), {x}, "softmax",
                             [outer, extent, inner](Node& self) {
                               Node& in = *self.parents[0];
                               if (!in.requires_grad) return;
                               auto& g = in.ensure_grad();
                               const auto& y = self.data;
                               for (std::size_t o = 0; o < outer; ++o) {
                                 for (std::size_t i = 0; i < inner; ++i) {
                                   const std::size_t base = o * extent * inner + i;
                                   double dot = 0.0;
                                   for (std::size_t a = 0; a < extent; ++a) {
                                     dot += self.grad[base + a * inner] * y[base + a * inner];
                                   }
                                   for (std::size_t a = 0; a < extent; ++a) {
                                     const std::size_t idx = base + a * inner;
                                     g[idx] += y[idx] * (self.grad[idx] - dot);
                                   }
                                 }
                               }
                             });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const bool batched = a.rank() == 3;
  require((a.rank() == 2 && b.rank() == 2) || (a.rank() == 3 && b.rank() == 3),
          "matmul: operands must both be 2-D or both 3-D, got " + to_string(a.shape()) +
              " and " + to_string(b.shape()));
  const std::size_t off = batched ? 1 : 0;
  const std::size_t batch = batched ? a.dim(0) : 1;
  if (batched) require(b.dim(0) == batch, "matmul: batch extents differ");
  const std::size_t rows = a.dim(off), inner = a.dim(off + 1), cols = b.dim(off + 1);
  require(b.dim(off) == inner, "matmul: inner extents differ (" + std::to_string(inner) +
                                   " vs " + std::to_string(b.dim(off)) + ")");

  std::vector<double> out(batch * rows * cols);
  kernels::parallel::matmul(batch, rows, inner, cols, a.values(), b.values(), out);
  Shape out_shape = batched ? Shape{batch, rows, cols} : Shape{rows, cols};
  return Tensor::make_result(
      std::move(out_shape), std::move(out), {a, b}, "matmul",
      [batch, rows, inner, cols](Node& self) {
        Node& l = *self.parents[0];
        Node& r = *self.parents[1];
        for (std::size_t s = 0; s < batch; ++s) {
          const double* gc = self.grad.data() + s * rows * cols;
          if (l.requires_grad) {
            // dA = dC * B^T
            kernels::parallel::gemm_accumulate(false, true, rows, inner, cols, gc, cols,
                                               r.data.data() + s * inner * cols, cols,
                                               l.ensure_grad().data() + s * rows * inner,
                                               inner);
          }
          if (r.requires_grad) {
            // dB = A^T * dC
            kernels::parallel::gemm_accumulate(true, false, inner, cols, rows,
                                               l.data.data() + s * rows * inner, inner, gc,
                                               cols, r.ensure_grad().data() + s * inner * cols,
                                               cols);
          }
        }
      });
}

Tensor reshape(const Tensor& x, Shape shape) {
  require(numel(shape) == x.numel(), "reshape: cannot view " + to_string(x.shape()) +
                                         " as " + to_string(shape));
  std::vector<double> out(x.values().begin(), x.values().end());
  return Tensor::make_result(std::move(shape), std::move(out), {x}, "reshape",
                             [](Node& self) { self.parents[0]->accumulate(self.grad); });
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& order) {
  const Shape& s = x.shape();
  require(order.size() == s.size(), "permute: order rank mismatch");
  std::vector<bool> seen(s.size(), false);
  for (std::size_t a : order) {
    require(a < s.size() && !seen[a], "permute: order is not a permutation");
    seen[a] = true;
  }
  Shape out_shape(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out_shape[i] = s[order[i]];

  std::vector<std::size_t> in_strides(s.size(), 1);
  for (std::size_t i = s.size(); i-- > 1;) in_strides[i - 1] = in_strides[i] * s[i];
  // source offset for each output element
  const std::size_t total = x.numel();
  std::vector<std::size_t> source(total);
  std::vector<std::size_t> counter(s.size(), 0);
  std::size_t offset = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    source[idx] = offset;
    for (std::size_t d = s.size(); d-- > 0;) {
      ++counter[d];
      offset += in_strides[order[d]];
      if (counter[d] < out_shape[d]) break;
      offset -= counter[d] * in_strides[order[d]];
      counter[d] = 0;
    }
  }
  const auto v = x.values();
  std::vector<double> out(total);
  for (std::size_t i = 0; i < total; ++i) out[i] = v[source[i]];
  return Tensor::make_result(std::move(out_shape), std::move(out), {x}, "permute",
                             [source = std::move(source)](Node& self) {
                               Node& in = *self.parents[0];
                               if (!in.requires_grad) return;
                               auto& g = in.ensure_grad();
                               for (std::size_t i = 0; i < source.size(); ++i) {
                                 g[source[i]] += self.grad[i];
                               }
                             });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  require(!parts.empty(), "concat: no inputs");
  const Shape& first = parts.front().shape();
  require(axis < first.size(), "concat: axis out of range");
  std::size_t total_extent = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) ok = false;
    }
    require(ok, "concat: non-concatenated extents differ: " + to_string(first) + " vs " +
                    to_string(s));
    total_extent += s[axis];
  }
  const std::size_t outer = product(first, 0, axis);
  const std::size_t inner = product(first, axis + 1, first.size());
  Shape out_shape = first;
  out_shape[axis] = total_extent;
  std::vector<double> out(outer * total_extent * inner);
  std::vector<std::size_t> chunks;
  for (const Tensor& p : parts) chunks.push_back(p.dim(axis) * inner);
  const std::size_t row = total_extent * inner;
  std::size_t col = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const auto v = parts[pi].values();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(v.begin() + o * chunks[pi], chunks[pi], out.begin() + o * row + col);
    }
    col += chunks[pi];
  }
  return Tensor::make_result(std::move(out_shape), std::move(out), parts, "concat",
                             [chunks, outer, row](Node& self) {
                               std::size_t col = 0;
                               for (std::size_t pi = 0; pi < chunks.size(); ++pi) {
                                 Node& p = *self.parents[pi];
                                 if (p.requires_grad && chunks[pi] > 0) {
                                   auto& g = p.ensure_grad();
                                   for (std::size_t o = 0; o < outer; ++o) {
                                     for (std::size_t i = 0; i < chunks[pi]; ++i) {
                                       g[o * chunks[pi] + i] += self.grad[o * row + col + i];
                                     }
                                   }
                                 }
                                 col += chunks[pi];
                               }
                             });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& s = x.shape();
  require(axis < s.size(), "slice: axis out of range");
  require(begin <= end && end <= s[axis], "slice: range [" + std::to_string(begin) + ", " +
                                              std::to_string(end) + ") invalid for extent " +
                                              std::to_string(s[axis]));
  const std::size_t outer = product(s, 0, axis);
  const std::size_t inner = product(s, axis + 1, s.size());
  const std::size_t row = s[axis] * inner;
  const std::size_t chunk = (end - begin) * inner;
  const std::size_t start = begin * inner;
  Shape out_shape = s;
  out_shape[axis] = end - begin;
  const auto v = x.values();
  std::vector<double> out(outer * chunk);
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(v.begin() + o * row + start, chunk, out.begin() + o * chunk);
  }
  return Tensor::make_result(std::move(out_shape), std::move(out), {x}, "slice",
                             [outer, row, chunk, start](Node& self) {
                               Node& in = *self.parents[0];
                               if (!in.requires_grad) return;
                               auto& g = in.ensure_grad();
                               for (std::size_t o = 0; o < outer; ++o) {
                                 for (std::size_t i = 0; i < chunk; ++i) {
                                   g[o * row + start + i] += self.grad[o * chunk + i];
                                 }
                               }
                             });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  return Tensor::make_result({1}, {acc}, {x}, "sum", [](Node& self) {
    Node& in = *self.parents[0];
    if (!in.requires_grad) return;
    auto& g = in.ensure_grad();
    for (double& gi : g) gi += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  require(x.numel() > 0, "mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor weighted_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> labels,
                              std::span<const double> class_weights) {
  require(logits.rank() == 4, "weighted_cross_entropy: logits must be N x C x H x W");
  const Shape& s = logits.shape();
  const std::size_t batch = s[0], classes = s[1], pixels = s[2] * s[3];
  require(labels.size() == batch * pixels,
          "weighted_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
              std::to_string(batch * pixels) + " pixels");
  require(class_weights.size() == classes,
          "weighted_cross_entropy: class weight count differs from class count");
  for (std::uint8_t y : labels) {
    if (y >= classes) {
      throw ValueError("weighted_cross_entropy: invalid label " + std::to_string(y));
    }
  }

  const auto v = logits.values();
  // Softmax probabilities are kept for the backward pass.
  std::vector<double> probs(v.size());
  double loss = 0.0, total_weight = 0.0;
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t p = 0; p < pixels; ++p) {
      const std::size_t base = n * classes * pixels + p;
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < classes; ++c) top = std::max(top, v[base + c * pixels]);
      double z = 0.0;
      for (std::size_t c = 0; c < classes; ++c) z += std::exp(v[base + c * pixels] - top);
      const double log_z = std::log(z) + top;
      for (std::size_t c = 0; c < classes; ++c) {
        probs[base + c * pixels] = std::exp(v[base + c * pixels] - log_z);
      }
      const std::uint8_t y = labels[n * pixels + p];
      const double w = class_weights[y];
      loss += w * (log_z - v[base + y * pixels]);
      total_weight += w;
    }
  }
  if (!(total_weight > 0.0)) {
    throw ValueError("weighted_cross_entropy: labelled pixels carry zero total weight");
  }
  std::vector<double> weights(class_weights.begin(), class_weights.end());
  std::vector<std::uint8_t> y(labels.begin(), labels.end());
  return Tensor::make_result(
      {1}, {loss / total_weight}, {logits}, "weighted_cross_entropy",
      [probs = std::move(probs), weights = std::move(weights), y = std::move(y), batch,
       classes, pixels, total_weight](Node& self) {
        Node& in = *self.parents[0];
        if (!in.requires_grad) return;
        auto& g = in.ensure_grad();
        const double scale_factor = self.grad[0] / total_weight;
        for (std::size_t n = 0; n < batch; ++n) {
          for (std::size_t p = 0; p < pixels; ++p) {
            const std::size_t base = n * classes * pixels + p;
            const std::uint8_t label = y[n * pixels + p];
            const double w = weights[label] * scale_factor;
            for (std::size_t c = 0; c < classes; ++c) {
              const double target = c == label ? 1.0 : 0.0;
              g[base + c * pixels] += w * (probs[base + c * pixels] - target);
            }
          }
        }
      });
}

}  // namespace fgseg
