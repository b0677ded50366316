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

#include "fgseg/segnet/model.hpp"

#include <cmath>
#include <random>

#include "fgseg/error.hpp"
#include "fgseg/random.hpp"
#include "fgseg/tensor/ops.hpp"

namespace fgseg::segnet {

namespace {

std::string stage_name(const char* part, std::size_t stage, const char* leaf) {
  return std::string(part) + std::to_string(stage) + "." + leaf;
}

std::string conv_prefix(const char* part, std::size_t stage, std::size_t conv) {
  return std::string(part) + std::to_string(stage) + ".conv" + std::to_string(conv);
}

std::string conv_name(const char* part, std::size_t stage, std::size_t conv, const char* leaf) {
  return conv_prefix(part, stage, conv) + "." + leaf;
}

Tensor kaiming(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  std::vector<double> v(numel(shape));
  for (double& x : v) x = dist(rng);
  return Tensor(std::move(shape), std::move(v), true);
}

void add_conv(ModelParams& p, const std::string& prefix, std::size_t in, std::size_t out,
              std::size_t k, std::mt19937_64& rng) {
  p.add(prefix + ".weight", kaiming({out, in, k, k}, in * k * k, rng));
  p.add(prefix + ".bias", Tensor::zeros({out}, true));
}

Tensor conv_block(Tensor x, const ModelParams& p, const char* part, std::size_t stage,
                  std::size_t convs) {
  for (std::size_t j = 0; j < convs; ++j) {
    x = relu(conv2d(x, p.get(conv_name(part, stage, j, "weight")),
                    p.get(conv_name(part, stage, j, "bias")), 1, 1));
  }
  return x;
}

void check_images(const Tensor& images, const UNetConfig& c) {
  if (images.rank() != 4 || images.dim(1) != c.in_channels || images.dim(2) != c.image_size ||
      images.dim(3) != c.image_size) {
    throw DimensionError("network expects N x " + std::to_string(c.in_channels) + " x " +
                         std::to_string(c.image_size) + " x " + std::to_string(c.image_size) +
                         " images, got " + to_string(images.shape()));
  }
}

std::vector<Tensor> slice_all(const std::vector<Tensor>& xs, std::size_t begin,
                              std::size_t end) {
  std::vector<Tensor> out;
  out.reserve(xs.size());
  for (const Tensor& x : xs) out.push_back(slice(x, 0, begin, end));
  return out;
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kBaseline:
      return "baseline";
    case Variant::kFgWoKfsFbw:
      return "fg_wo_kfs_fbw";
    case Variant::kFgWoFbw:
      return "fg_wo_fbw";
    case Variant::kFgFull:
      return "fg_full";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : kAllVariants) {
    if (name == variant_name(v)) return v;
  }
  throw ValueError("unknown variant '" + name +
                   "' (valid: baseline, fg_wo_kfs_fbw, fg_wo_fbw, fg_full)");
}

bool uses_neck(Variant v) { return v != Variant::kBaseline; }
bool uses_force_selection(Variant v) {
  return v == Variant::kFgWoFbw || v == Variant::kFgFull;
}
bool uses_force_weights(Variant v) { return v == Variant::kFgFull; }

void UNetConfig::validate() const {
  if (in_channels < 1) throw ValueError("model in_channels must be >= 1");
  if (depth < 2) throw ValueError("model depth must be >= 2");
  if (base_channels < 8) throw ValueError("model base_channels must be >= 8");
  if (num_classes < 2) throw ValueError("model num_classes must be >= 2");
  if (convs_per_stage < 1) throw ValueError("model convs_per_stage must be >= 1");
  if (image_size == 0 || image_size % (std::size_t{1} << depth) != 0) {
    throw ValueError("image size " + std::to_string(image_size) + " is not divisible by 2^" +
                     std::to_string(depth));
  }
  neck_config();
}

fgneck::NeckConfig UNetConfig::neck_config() const {
  fgneck::NeckConfig n;
  n.c_in = bottleneck_channels();
  n.c_k = key_channels;
  n.c_v = value_channels;
  n.axis = attention_axis;
  return n.resolved();
}

void ModelParams::add(std::string name, Tensor value) {
  if (contains(name)) throw ValueError("duplicate parameter name: " + name);
  value.set_requires_grad(true);
  const std::size_t n = value.numel();
  params_.push_back({std::move(name), std::move(value), std::vector<double>(n, 0.0),
                     std::vector<double>(n, 0.0)});
}

const Tensor& ModelParams::get(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.value;
  }
  throw ValueError("no parameter named " + name);
}

bool ModelParams::contains(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return true;
  }
  return false;
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

void ModelParams::zero_grad() {
  for (auto& p : params_) p.value.zero_grad();
}

ModelParams ModelParams::clone() const {
  ModelParams out;
  for (const auto& p : params_) {
    Tensor t(p.value.shape(), std::vector<double>(p.value.values().begin(), p.value.values().end()),
             true);
    out.params_.push_back({p.name, std::move(t), p.square_avg, p.momentum});
  }
  return out;
}

Checkpoint ModelParams::to_checkpoint() const {
  Checkpoint ck;
  for (const auto& p : params_) ck.tensors.emplace_back(p.name, p.value.detach());
  return ck;
}

ModelParams ModelParams::from_checkpoint(const Checkpoint& ck, const ModelParams& like) {
  ModelParams out;
  for (const auto& p : like.params_) {
    const Tensor* t = ck.find(p.name);
    if (!t) throw DataError("checkpoint lacks parameter " + p.name);
    if (t->shape() != p.value.shape()) {
      throw DataError("checkpoint parameter " + p.name + " has shape " + to_string(t->shape()) +
                      ", model expects " + to_string(p.value.shape()));
    }
    out.add(p.name, t->clone());
  }
  if (ck.tensors.size() != like.params_.size()) {
    throw DataError("checkpoint holds " + std::to_string(ck.tensors.size()) +
                    " tensors, model expects " + std::to_string(like.params_.size()));
  }
  return out;
}

ModelParams init_params(const UNetConfig& config, bool with_neck, std::uint64_t seed) {
  config.validate();
  ModelParams p;
  std::mt19937_64 rng(derive_seed(Stream::kInit, {seed}));
  const std::size_t convs = config.convs_per_stage;
  for (std::size_t i = 0; i <= config.depth; ++i) {
    std::size_t in = i == 0 ? config.in_channels : config.channels(i - 1);
    for (std::size_t j = 0; j < convs; ++j) {
      add_conv(p, conv_prefix("enc", i, j), in, config.channels(i), 3, rng);
      in = config.channels(i);
    }
  }
  for (std::size_t i = config.depth; i >= 1; --i) {
    const std::size_t hi = config.channels(i), lo = config.channels(i - 1);
    p.add(stage_name("dec", i, "up.weight"), kaiming({hi, lo, 2, 2}, hi * 4, rng));
    p.add(stage_name("dec", i, "up.bias"), Tensor::zeros({lo}, true));
    std::size_t in = 2 * lo;
    for (std::size_t j = 0; j < convs; ++j) {
      add_conv(p, conv_prefix("dec", i, j), in, lo, 3, rng);
      in = lo;
    }
  }
  add_conv(p, "head", config.channels(0), config.num_classes, 1, rng);

  if (with_neck) {
    std::mt19937_64 neck_rng(derive_seed(Stream::kNeckInit, {seed}));
    const fgneck::NeckConfig nc = config.neck_config();
    fgneck::NeckParams np = fgneck::init_neck_params(nc, neck_rng);
    p.add("neck.key.weight", np.key_kernel);
    p.add("neck.key.bias", np.key_bias);
    p.add("neck.value.weight", np.value_kernel);
    p.add("neck.value.bias", np.value_bias);
    add_conv(p, "neck.adapter", 2 * nc.c_v, nc.c_in, 1, neck_rng);
  }
  return p;
}

fgneck::NeckParams neck_params(const ModelParams& params) {
  return {params.get("neck.key.weight"), params.get("neck.key.bias"),
          params.get("neck.value.weight"), params.get("neck.value.bias")};
}

EncoderOutput encoder_forward(const Tensor& images, const ModelParams& params,
                              const UNetConfig& config) {
  check_images(images, config);
  EncoderOutput out;
  Tensor x = images;
  for (std::size_t i = 0; i <= config.depth; ++i) {
    if (i > 0) x = max_pool2(x);
    x = conv_block(x, params, "enc", i, config.convs_per_stage);
    if (i < config.depth) out.skips.push_back(x);
  }
  out.bottleneck = x;
  return out;
}

Tensor decoder_forward(const Tensor& bottleneck, const std::vector<Tensor>& skips,
                       const ModelParams& params, const UNetConfig& config) {
  if (skips.size() != config.depth) {
    throw DimensionError("decoder expects " + std::to_string(config.depth) + " skip features");
  }
  Tensor x = bottleneck;
  for (std::size_t i = config.depth; i >= 1; --i) {
    x = upsample2(x, params.get(stage_name("dec", i, "up.weight")),
                  params.get(stage_name("dec", i, "up.bias")));
    x = concat({x, skips[i - 1]}, 1);
    x = conv_block(x, params, "dec", i, config.convs_per_stage);
  }
  return conv2d(x, params.get("head.weight"), params.get("head.bias"));
}

Tensor forward_baseline(const Tensor& images, const ModelParams& params,
                        const UNetConfig& config) {
  const EncoderOutput enc = encoder_forward(images, params, config);
  return decoder_forward(enc.bottleneck, enc.skips, params, config);
}

Tensor forward_fg_encoded(const EncoderOutput& current, const Tensor& key_min_bottleneck,
                          const Tensor& key_max_bottleneck, const Tensor& weights,
                          const ModelParams& params, const UNetConfig& config) {
  const Tensor fused = fgneck::neck_forward(current.bottleneck, key_min_bottleneck,
                                            key_max_bottleneck, weights, neck_params(params),
                                            config.attention_axis);
  const Tensor x =
      conv2d(fused, params.get("neck.adapter.weight"), params.get("neck.adapter.bias"));
  return decoder_forward(x, current.skips, params, config);
}

Tensor forward_fg(const FgInput& input, const ModelParams& params, const UNetConfig& config,
                  NeckMode mode) {
  const std::size_t n = input.current.rank() == 4 ? input.current.dim(0) : 0;
  if (input.key_min.shape() != input.current.shape() ||
      input.key_max.shape() != input.current.shape()) {
    throw DimensionError("forward_fg: key frames and current frame differ in shape");
  }
  // One encoder pass over [current; key_min; key_max] shares parameters by
  // construction.
  const EncoderOutput all =
      encoder_forward(concat({input.current, input.key_min, input.key_max}, 0), params, config);
  EncoderOutput current{slice(all.bottleneck, 0, 0, n), slice_all(all.skips, 0, n)};
  if (mode == NeckMode::kIdentityStub) {
    return decoder_forward(current.bottleneck, current.skips, params, config);
  }
  return forward_fg_encoded(current, slice(all.bottleneck, 0, n, 2 * n),
                            slice(all.bottleneck, 0, 2 * n, 3 * n), input.weights, params,
                            config);
}

std::vector<std::uint8_t> predict_mask(const Tensor& logits) {
  if (logits.rank() != 4) throw DimensionError("predict_mask expects N x C x H x W logits");
  const std::size_t n = logits.dim(0), c = logits.dim(1), hw = logits.dim(2) * logits.dim(3);
  const auto v = logits.values();
  std::vector<std::uint8_t> out(n * hw);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t p = 0; p < hw; ++p) {
      std::size_t best = 0;
      double best_v = v[b * c * hw + p];
      for (std::size_t k = 1; k < c; ++k) {
        const double x = v[(b * c + k) * hw + p];
        if (x > best_v) {
          best_v = x;
          best = k;
        }
      }
      out[b * hw + p] = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

std::uint64_t forward_macs(const UNetConfig& config, bool with_neck) {
  config.validate();
  auto conv = [](std::uint64_t in, std::uint64_t out, std::uint64_t k, std::uint64_t side) {
    return in * out * k * k * side * side;
  };
  const std::size_t convs = config.convs_per_stage;
  std::uint64_t encoder = 0;
  for (std::size_t i = 0; i <= config.depth; ++i) {
    const std::uint64_t side = config.image_size >> i;
    std::size_t in = i == 0 ? config.in_channels : config.channels(i - 1);
    for (std::size_t j = 0; j < convs; ++j) {
      encoder += conv(in, config.channels(i), 3, side);
      in = config.channels(i);
    }
  }
  std::uint64_t decoder = 0;
  for (std::size_t i = config.depth; i >= 1; --i) {
    const std::uint64_t side = config.image_size >> (i - 1);
    const std::uint64_t hi = config.channels(i), lo = config.channels(i - 1);
    decoder += hi * lo * 4 * (side / 2) * (side / 2);
    std::uint64_t in = 2 * lo;
    for (std::size_t j = 0; j < convs; ++j) {
      decoder += conv(in, lo, 3, side);
      in = lo;
    }
  }
  decoder += conv(config.channels(0), config.num_classes, 1, config.image_size);
  if (!with_neck) return encoder + decoder;
  const fgneck::NeckConfig nc = config.neck_config();
  const std::uint64_t side = config.bottleneck_size();
  const std::uint64_t neck = fgneck::neck_macs(nc, side, side);
  const std::uint64_t adapter = conv(2 * nc.c_v, nc.c_in, 1, side);
  return (fgneck::kKeyFrames + 1) * encoder + neck + adapter + decoder;
}

}  // namespace fgseg::segnet
