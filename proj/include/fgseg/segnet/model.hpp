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

// Tiny U-shaped segmentation network with an optional force-guided neck.
//
// Channels grow as base * 2^i. Encoder stage 0 runs `convs_per_stage` 3x3
// convolutions (+ReLU) at full resolution; stages 1..depth max-pool first.
// Each decoder stage upsamples with a learned 2x2 transposed convolution,
// concatenates the matching skip feature and runs the same number of 3x3
// convolutions; a 1x1 head yields class logits.
//
// The force-guided forward encodes the current frame and both key frames
// with the same encoder, runs the neck on the three bottlenecks, maps the
// 2*C_V fused channels back to C_in with a 1x1 adapter, and decodes with
// skip connections from the current frame only.

#ifndef FGSEG_SEGNET_MODEL_HPP_
#define FGSEG_SEGNET_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fgseg/fgneck/neck.hpp"
#include "fgseg/tensor/checkpoint.hpp"
#include "fgseg/tensor/tensor.hpp"

namespace fgseg::segnet {

// The four ablation rows.
enum class Variant {
  kBaseline,     // no neck
  kFgWoKfsFbw,   // neck fed the two preceding frames, weights fixed at 0.5
  kFgWoFbw,      // force-selected key frames, weights fixed at 0.5
  kFgFull,       // force-selected key frames and force-based weights
};

inline constexpr Variant kAllVariants[] = {Variant::kBaseline, Variant::kFgWoKfsFbw,
                                           Variant::kFgWoFbw, Variant::kFgFull};

const char* variant_name(Variant v);
// Throws ValueError listing the valid names.
Variant parse_variant(const std::string& name);
bool uses_neck(Variant v);
bool uses_force_selection(Variant v);
bool uses_force_weights(Variant v);

struct UNetConfig {
  std::size_t in_channels = 1;
  std::size_t base_channels = 16;
  std::size_t depth = 3;
  std::size_t num_classes = 3;
  std::size_t convs_per_stage = 1;
  std::size_t image_size = 64;  // square inputs
  std::size_t key_channels = 0;    // 0: bottleneck channels / 8
  std::size_t value_channels = 0;  // 0: bottleneck channels / 2
  fgneck::AttentionAxis attention_axis = fgneck::AttentionAxis::kMemory;

  // Throws ValueError unless depth >= 2, base >= 8, convs >= 1 and the image
  // size is divisible by 2^depth.
  void validate() const;
  std::size_t channels(std::size_t stage) const { return base_channels << stage; }
  std::size_t bottleneck_channels() const { return channels(depth); }
  std::size_t bottleneck_size() const { return image_size >> depth; }
  fgneck::NeckConfig neck_config() const;
};

// A trainable tensor plus its optimizer state.
struct Parameter {
  std::string name;
  Tensor value;
  std::vector<double> square_avg;
  std::vector<double> momentum;
};

class ModelParams {
 public:
  void add(std::string name, Tensor value);
  const Tensor& get(const std::string& name) const;  // ValueError if absent
  bool contains(const std::string& name) const;

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  std::size_t scalar_count() const;
  void zero_grad();

  // Deep copy (new tensors, same values and optimizer state).
  ModelParams clone() const;

  Checkpoint to_checkpoint() const;
  // Loads tensors by name; every parameter of `like` must be present with the
  // same shape. Throws DataError otherwise.
  static ModelParams from_checkpoint(const Checkpoint& ck, const ModelParams& like);

 private:
  std::vector<Parameter> params_;
};

// Kaiming-normal kernels and zero biases. Backbone tensors depend only on
// `seed`; the neck and adapter draw from a separate stream, so every variant
// shares its backbone initialization for a given seed.
ModelParams init_params(const UNetConfig& config, bool with_neck, std::uint64_t seed);

fgneck::NeckParams neck_params(const ModelParams& params);

struct EncoderOutput {
  Tensor bottleneck;           // N x C_in x h x w
  std::vector<Tensor> skips;   // stage 0 .. depth-1
};

// images N x in_channels x S x S.
EncoderOutput encoder_forward(const Tensor& images, const ModelParams& params,
                              const UNetConfig& config);
Tensor decoder_forward(const Tensor& bottleneck, const std::vector<Tensor>& skips,
                       const ModelParams& params, const UNetConfig& config);

Tensor forward_baseline(const Tensor& images, const ModelParams& params,
                        const UNetConfig& config);

struct FgInput {
  Tensor current;   // N x 1 x S x S
  Tensor key_min;
  Tensor key_max;
  Tensor weights;   // N x 2, (w_min, w_max)
};

enum class NeckMode {
  kForceGuided,
  // Replaces neck and adapter with the identity on the current bottleneck.
  // Used to check that the surrounding wiring reduces to the baseline.
  kIdentityStub,
};

Tensor forward_fg(const FgInput& input, const ModelParams& params, const UNetConfig& config,
                  NeckMode mode = NeckMode::kForceGuided);

// Neck + adapter + decoder on already encoded frames.
Tensor forward_fg_encoded(const EncoderOutput& current, const Tensor& key_min_bottleneck,
                          const Tensor& key_max_bottleneck, const Tensor& weights,
                          const ModelParams& params, const UNetConfig& config);

// Per-pixel argmax over the class axis of N x C x H x W logits; ties go to
// the lower class index. Returns N*H*W labels.
std::vector<std::uint8_t> predict_mask(const Tensor& logits);

// Multiply-accumulate count of one forward pass on one sample: every
// convolution (C_in * C_out * k^2 * H_out * W_out), transposed convolution
// (C_in * C_out * 4 * H_in * W_in), the neck encodings and both attention
// products. Pooling, activations and softmax are not counted.
std::uint64_t forward_macs(const UNetConfig& config, bool with_neck);

}  // namespace fgseg::segnet

#endif  // FGSEG_SEGNET_MODEL_HPP_
