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

#include "fgseg/fgneck/neck.hpp"

#include <cmath>
#include <string>

#include "fgseg/error.hpp"
#include "fgseg/tensor/ops.hpp"

namespace fgseg::fgneck {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

Tensor kaiming(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  std::vector<double> v(numel(shape));
  for (double& x : v) x = dist(rng);
  return Tensor(std::move(shape), std::move(v), true);
}

// B x N x C x H x W -> B x C x (N * H * W), memory index n * M + m.
Tensor flatten_memory(const Tensor& x) {
  const Shape& s = x.shape();
  return reshape(permute(x, {0, 2, 1, 3, 4}), {s[0], s[2], s[1] * s[3] * s[4]});
}

}  // namespace

const char* axis_name(AttentionAxis axis) {
  return axis == AttentionAxis::kMemory ? "memory" : "current";
}

AttentionAxis parse_axis(const std::string& name) {
  if (name == "memory") return AttentionAxis::kMemory;
  if (name == "current") return AttentionAxis::kCurrent;
  throw ValueError("unknown attention axis '" + name + "' (expected memory or current)");
}

NeckConfig NeckConfig::resolved() const {
  NeckConfig c = *this;
  if (c.c_k == 0) c.c_k = c.c_in / 8;
  if (c.c_v == 0) c.c_v = c.c_in / 2;
  if (c.c_k == 0 || c.c_v == 0 || c.c_k >= c.c_in || c.c_v > c.c_in) {
    throw ValueError("neck channels must satisfy 0 < c_k < c_in and 0 < c_v <= c_in (c_in " +
                     std::to_string(c.c_in) + ", c_k " + std::to_string(c.c_k) + ", c_v " +
                     std::to_string(c.c_v) + ")");
  }
  return c;
}

NeckParams init_neck_params(const NeckConfig& config, std::mt19937_64& rng) {
  const NeckConfig c = config.resolved();
  NeckParams p;
  p.key_kernel = kaiming({c.c_k, c.c_in, 1, 1}, c.c_in, rng);
  p.key_bias = Tensor::zeros({c.c_k}, true);
  p.value_kernel = kaiming({c.c_v, c.c_in, 3, 3}, c.c_in * 9, rng);
  p.value_bias = Tensor::zeros({c.c_v}, true);
  return p;
}

KeyValue encode_kv(const Tensor& feature, const NeckParams& params) {
  require(feature.rank() == 4, "encode_kv expects B x C x H x W, got " +
                                   to_string(feature.shape()));
  require(feature.dim(1) == params.key_kernel.dim(1),
          "encode_kv: feature has " + std::to_string(feature.dim(1)) +
              " channels, encoding layer expects " + std::to_string(params.key_kernel.dim(1)));
  return {conv2d(feature, params.key_kernel, params.key_bias, 1, 0),
          conv2d(feature, params.value_kernel, params.value_bias, 1, 1)};
}

NeckMemory stack_memory(const KeyValue& current, const KeyValue& key_min,
                        const KeyValue& key_max) {
  auto stack = [](const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(), "stack_memory: key frames disagree in shape");
    Shape s = a.shape();
    s.insert(s.begin() + 1, 1);
    return concat({reshape(a, s), reshape(b, s)}, 1);
  };
  NeckMemory m{stack(key_min.key, key_max.key), stack(key_min.value, key_max.value),
               current.key, current.value};
  require(m.e_k.shape() == key_min.key.shape() && m.e_v.shape() == key_min.value.shape(),
          "stack_memory: current frame and key frames disagree in shape");
  return m;
}

Tensor apply_weights(const Tensor& d_v, const Tensor& weights) {
  require(d_v.rank() == 5 && d_v.dim(1) == kKeyFrames,
          "apply_weights expects B x 2 x C x H x W, got " + to_string(d_v.shape()));
  require(weights.shape() == Shape{d_v.dim(0), kKeyFrames},
          "apply_weights: weights " + to_string(weights.shape()) + " do not match " +
              to_string(d_v.shape()));
  return scale_leading(d_v, weights);
}

Tensor attention_map(const Tensor& d_k, const Tensor& e_k, AttentionAxis axis) {
  require(d_k.rank() == 5 && e_k.rank() == 4, "attention_map: expected 5-D memory keys and "
                                              "4-D current keys");
  require(d_k.dim(0) == e_k.dim(0) && d_k.dim(2) == e_k.dim(1) && d_k.dim(3) == e_k.dim(2) &&
              d_k.dim(4) == e_k.dim(3),
          "attention_map: memory keys " + to_string(d_k.shape()) +
              " do not match current keys " + to_string(e_k.shape()));
  const std::size_t b = e_k.dim(0), ck = e_k.dim(1), m = e_k.dim(2) * e_k.dim(3);
  const Tensor memory = permute(flatten_memory(d_k), {0, 2, 1});  // B x NM x C_K
  const Tensor query = reshape(e_k, {b, ck, m});                  // B x C_K x M
  const Tensor scores = matmul(memory, query);                    // B x NM x M
  return softmax(scores, axis == AttentionAxis::kMemory ? 1 : 2);
}

Tensor retrieve(const Tensor& s, const Tensor& weighted_d_v) {
  require(weighted_d_v.rank() == 5, "retrieve expects B x N x C x H x W values");
  const Shape& v = weighted_d_v.shape();
  const std::size_t m = v[3] * v[4];
  require(s.shape() == Shape{v[0], v[1] * m, m},
          "retrieve: attention " + to_string(s.shape()) + " does not match values " +
              to_string(v));
  const Tensor out = matmul(flatten_memory(weighted_d_v), s);  // B x C_V x M
  return reshape(out, {v[0], v[2], v[3], v[4]});
}

Tensor fuse(const Tensor& d_tilde_v, const Tensor& e_v) {
  require(d_tilde_v.shape() == e_v.shape(), "fuse: " + to_string(d_tilde_v.shape()) + " vs " +
                                                to_string(e_v.shape()));
  return concat({d_tilde_v, e_v}, 1);
}

Tensor neck_forward(const Tensor& current, const Tensor& key_min, const Tensor& key_max,
                    const Tensor& weights, const NeckParams& params, AttentionAxis axis) {
  const NeckMemory mem =
      stack_memory(encode_kv(current, params), encode_kv(key_min, params),
                   encode_kv(key_max, params));
  const Tensor s = attention_map(mem.d_k, mem.e_k, axis);
  return fuse(retrieve(s, apply_weights(mem.d_v, weights)), mem.e_v);
}

std::size_t neck_macs(const NeckConfig& config, std::size_t height, std::size_t width) {
  const NeckConfig c = config.resolved();
  const std::size_t m = height * width;
  const std::size_t frames = kKeyFrames + 1;
  const std::size_t encode = frames * m * (c.c_k * c.c_in + c.c_v * c.c_in * 9);
  const std::size_t scores = kKeyFrames * m * m * c.c_k;
  const std::size_t read = c.c_v * kKeyFrames * m * m;
  return encode + scores + read;
}

}  // namespace fgseg::fgneck
