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

// Force-guided attention neck. Every tensor carries a leading batch axis B;
// spatial extents H x W give M = H * W positions per frame and the memory
// holds N = 2 key frames (index 0 from the minimum-force frame, 1 from the
// maximum-force frame).
//
//   encode_kv      B x C_in x H x W       -> key B x C_K x H x W, value B x C_V x H x W
//   stack_memory   two key-frame encodings -> d_k B x 2 x C_K x H x W, d_v B x 2 x C_V x H x W
//   apply_weights  d_v, weights B x 2     -> slice n of d_v scaled by weights[:, n]
//   attention_map  d_k, e_k               -> S  B x 2M x M
//   retrieve       S, weighted d_v        -> B x C_V x H x W
//   fuse           retrieved, e_v         -> B x 2C_V x H x W (retrieved first)

#ifndef FGSEG_FGNECK_NECK_HPP_
#define FGSEG_FGNECK_NECK_HPP_

#include <cstddef>
#include <random>
#include <string>

#include "fgseg/tensor/tensor.hpp"

namespace fgseg::fgneck {

// Which axis of the 2M x M score matrix the softmax normalizes.
enum class AttentionAxis {
  kMemory,   // each current position's weights over memory sum to 1
  kCurrent,  // each memory position's weights over current positions sum to 1
};

const char* axis_name(AttentionAxis axis);
AttentionAxis parse_axis(const std::string& name);

inline constexpr std::size_t kKeyFrames = 2;

struct NeckConfig {
  std::size_t c_in = 64;
  std::size_t c_k = 0;  // 0 selects c_in / 8
  std::size_t c_v = 0;  // 0 selects c_in / 2
  AttentionAxis axis = AttentionAxis::kMemory;

  // Fills in defaulted channel counts and checks c_k < c_in, c_v <= c_in.
  NeckConfig resolved() const;
};

// Shared encoding layer: a 1x1 key convolution and a 3x3 (padding 1) value
// convolution, both with bias.
struct NeckParams {
  Tensor key_kernel;    // C_K x C_in x 1 x 1
  Tensor key_bias;      // C_K
  Tensor value_kernel;  // C_V x C_in x 3 x 3
  Tensor value_bias;    // C_V
};

// Kaiming-normal kernels, zero biases.
NeckParams init_neck_params(const NeckConfig& config, std::mt19937_64& rng);

struct KeyValue {
  Tensor key;
  Tensor value;
};

struct NeckMemory {
  Tensor d_k;
  Tensor d_v;
  Tensor e_k;
  Tensor e_v;
};

KeyValue encode_kv(const Tensor& feature, const NeckParams& params);
NeckMemory stack_memory(const KeyValue& current, const KeyValue& key_min,
                        const KeyValue& key_max);
Tensor apply_weights(const Tensor& d_v, const Tensor& weights);
Tensor attention_map(const Tensor& d_k, const Tensor& e_k,
                     AttentionAxis axis = AttentionAxis::kMemory);
Tensor retrieve(const Tensor& s, const Tensor& weighted_d_v);
Tensor fuse(const Tensor& d_tilde_v, const Tensor& e_v);

// The full composition. `weights` is B x 2 holding (w_min, w_max) per item.
Tensor neck_forward(const Tensor& current, const Tensor& key_min, const Tensor& key_max,
                    const Tensor& weights, const NeckParams& params,
                    AttentionAxis axis = AttentionAxis::kMemory);

// Multiply-accumulates of one neck_forward call per batch item.
std::size_t neck_macs(const NeckConfig& config, std::size_t height, std::size_t width);

}  // namespace fgseg::fgneck

#endif  // FGSEG_FGNECK_NECK_HPP_
