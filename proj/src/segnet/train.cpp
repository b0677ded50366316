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

#include "fgseg/segnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

#include "fgseg/error.hpp"
#include "fgseg/random.hpp"
#include "fgseg/tensor/ops.hpp"

namespace fgseg::segnet {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Tensor frames_tensor(const std::vector<const dataio::Image*>& frames) {
  const std::size_t h = frames.front()->height, w = frames.front()->width;
  std::vector<double> v;
  v.reserve(frames.size() * h * w);
  for (const dataio::Image* f : frames) {
    if (f->height != h || f->width != w) throw DimensionError("batch frames differ in size");
    for (std::uint8_t p : f->pixels) v.push_back(static_cast<double>(p) / 255.0);
  }
  return Tensor({frames.size(), 1, h, w}, std::move(v));
}

// Rows of a leading-axis tensor, without gradient tracking.
Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& rows) {
  const std::size_t stride = x.numel() / x.dim(0);
  std::vector<double> v;
  v.reserve(rows.size() * stride);
  const auto src = x.values();
  for (std::size_t r : rows) {
    v.insert(v.end(), src.begin() + static_cast<std::ptrdiff_t>(r * stride),
             src.begin() + static_cast<std::ptrdiff_t>((r + 1) * stride));
  }
  Shape s = x.shape();
  s[0] = rows.size();
  return Tensor(std::move(s), std::move(v));
}

// Adds sum_i w[y_i] * nll_i and sum_i w[y_i] over all pixels of `logits`.
void accumulate_loss(const Tensor& logits, std::span<const std::uint8_t> labels,
                     const std::vector<double>& class_weights, double& numerator,
                     double& denominator) {
  const std::size_t n = logits.dim(0), c = logits.dim(1), hw = logits.dim(2) * logits.dim(3);
  const auto v = logits.values();
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t p = 0; p < hw; ++p) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < c; ++k) mx = std::max(mx, v[(b * c + k) * hw + p]);
      double z = 0.0;
      for (std::size_t k = 0; k < c; ++k) z += std::exp(v[(b * c + k) * hw + p] - mx);
      const std::uint8_t y = labels[b * hw + p];
      const double w = class_weights[y];
      numerator += w * (std::log(z) + mx - v[(b * c + y) * hw + p]);
      denominator += w;
    }
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate(std::size_t num_classes) const {
  if (!(learning_rate > 0.0)) throw ValueError("learning rate must be positive");
  if (batch_size < 1) throw ValueError("batch size must be >= 1");
  if (class_weights.size() != num_classes) {
    throw ValueError("expected " + std::to_string(num_classes) + " class weights, got " +
                     std::to_string(class_weights.size()));
  }
  for (double w : class_weights) {
    if (!(w > 0.0)) throw ValueError("class weights must be positive");
  }
  if (!(rmsprop.rho > 0.0 && rmsprop.rho < 1.0)) throw ValueError("rmsprop rho must lie in (0, 1)");
  if (!(rmsprop.epsilon > 0.0)) throw ValueError("rmsprop epsilon must be positive");
  if (rmsprop.momentum < 0.0 || rmsprop.momentum >= 1.0) {
    throw ValueError("rmsprop momentum must lie in [0, 1)");
  }
  if (rmsprop.weight_decay < 0.0) throw ValueError("weight decay must be >= 0");
}

dataio::Sample make_sample(const dataio::Video& video, std::size_t t, Variant variant) {
  if (t >= video.size()) {
    throw ValueError("frame " + std::to_string(t) + " out of range for video " + video.id);
  }
  if (!video.sequence.has_masks()) throw DataError("video " + video.id + " has no masks");
  const forcekeys::KeyFrameSelection sel = forcekeys::select_key_frames(video.forces);
  std::size_t a = sel.idx_min, b = sel.idx_max;
  if (!uses_force_selection(variant)) std::tie(a, b) = forcekeys::select_preceding_frames(t);
  dataio::Sample s;
  s.current = video.sequence.frames[t];
  s.mask = video.sequence.masks[t];
  s.key_min = video.sequence.frames[a];
  s.key_max = video.sequence.frames[b];
  s.f_cur = video.forces[t].magnitude();
  s.f_min = sel.f_min;
  s.f_max = sel.f_max;
  s.sequence_id = video.id;
  s.frame_index = t;
  return s;
}

forcekeys::DynamicWeights sample_weights(const dataio::Sample& sample, Variant variant) {
  if (!uses_force_weights(variant)) return {0.5, 0.5};
  return forcekeys::dynamic_weights(sample.f_cur, sample.f_min, sample.f_max);
}

Batch make_batch(const std::vector<dataio::Sample>& samples, Variant variant) {
  if (samples.empty()) throw ValueError("empty batch");
  std::vector<const dataio::Image*> cur, kmin, kmax;
  Batch batch;
  std::vector<double> w;
  for (const auto& s : samples) {
    cur.push_back(&s.current);
    kmin.push_back(&s.key_min);
    kmax.push_back(&s.key_max);
    batch.labels.insert(batch.labels.end(), s.mask.pixels.begin(), s.mask.pixels.end());
    const auto dw = sample_weights(s, variant);
    w.push_back(dw.w_min);
    w.push_back(dw.w_max);
  }
  batch.input.current = frames_tensor(cur);
  if (uses_neck(variant)) {
    batch.input.key_min = frames_tensor(kmin);
    batch.input.key_max = frames_tensor(kmax);
    batch.input.weights = Tensor({samples.size(), 2}, std::move(w));
  }
  return batch;
}

Tensor forward(const Batch& batch, const ModelParams& params, const UNetConfig& config,
               Variant variant) {
  if (!uses_neck(variant)) return forward_baseline(batch.input.current, params, config);
  return forward_fg(batch.input, params, config);
}

Evaluation evaluate(const ModelParams& params, const UNetConfig& config, Variant variant,
                    const std::vector<dataio::Video>& videos,
                    const std::vector<double>& class_weights) {
  NoGradGuard no_grad;
  Evaluation ev;
  double num = 0.0, den = 0.0;
  for (const dataio::Video& video : videos) {
    if (!video.sequence.has_masks()) throw DataError("video " + video.id + " has no masks");
    const std::size_t t_count = video.size();
    std::vector<const dataio::Image*> frames;
    std::vector<std::uint8_t> labels;
    for (std::size_t t = 0; t < t_count; ++t) {
      frames.push_back(&video.sequence.frames[t]);
      const auto& m = video.sequence.masks[t].pixels;
      labels.insert(labels.end(), m.begin(), m.end());
    }
    const EncoderOutput enc = encoder_forward(frames_tensor(frames), params, config);
    Tensor logits;
    if (!uses_neck(variant)) {
      logits = decoder_forward(enc.bottleneck, enc.skips, params, config);
    } else {
      std::vector<std::size_t> idx_min, idx_max;
      std::vector<double> w;
      const forcekeys::KeyFrameSelection sel = forcekeys::select_key_frames(video.forces);
      for (std::size_t t = 0; t < t_count; ++t) {
        std::size_t a = sel.idx_min, b = sel.idx_max;
        if (!uses_force_selection(variant)) std::tie(a, b) = forcekeys::select_preceding_frames(t);
        idx_min.push_back(a);
        idx_max.push_back(b);
        const auto dw = uses_force_weights(variant)
                            ? forcekeys::dynamic_weights(video.forces[t].magnitude(), sel.f_min,
                                                         sel.f_max)
                            : forcekeys::DynamicWeights{0.5, 0.5};
        w.push_back(dw.w_min);
        w.push_back(dw.w_max);
      }
      logits = forward_fg_encoded(enc, gather_rows(enc.bottleneck, idx_min),
                                  gather_rows(enc.bottleneck, idx_max),
                                  Tensor({t_count, 2}, std::move(w)), params, config);
    }
    accumulate_loss(logits, labels, class_weights, num, den);
    ev.confusion.accumulate(std::span<const std::uint8_t>(predict_mask(logits)),
                            std::span<const std::uint8_t>(labels));
    ev.frames += t_count;
  }
  if (ev.frames == 0) throw DataError("evaluation set is empty");
  ev.loss = num / den;
  return ev;
}

double train_step(ModelParams& params, const Batch& batch, const UNetConfig& model,
                  const TrainConfig& config, Variant variant, double lr) {
  params.zero_grad();
  const Tensor logits = forward(batch, params, model, variant);
  const Tensor loss = weighted_cross_entropy(logits, batch.labels, config.class_weights);
  loss.backward();
  rmsprop_step(params, config.rmsprop, lr);
  return loss.item();
}

TrainResult train(const std::vector<dataio::Video>& train_videos,
                  const std::vector<dataio::Video>& val_videos, const UNetConfig& model,
                  const TrainConfig& config, const dataio::AugmentConfig& augment,
                  Variant variant, const EpochCallback& on_epoch) {
  model.validate();
  config.validate(model.num_classes);
  if (train_videos.empty()) throw DataError("training split is empty");
  if (val_videos.empty()) throw DataError("validation split is empty");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t v = 0; v < train_videos.size(); ++v) {
    for (std::size_t t = 0; t < train_videos[v].size(); ++t) pairs.emplace_back(v, t);
  }
  const std::size_t per_epoch =
      config.samples_per_epoch == 0 ? pairs.size() : std::min(config.samples_per_epoch, pairs.size());

  ModelParams params = init_params(model, uses_neck(variant), config.seed);
  TrainResult result;
  PlateauScheduler scheduler(config.plateau, config.learning_rate);
  double best_loss = std::numeric_limits<double>::infinity();

  auto record = [&](std::size_t epoch, double train_loss, double lr) {
    const Evaluation ev = evaluate(params, model, variant, val_videos, config.class_weights);
    const eval::MetricsReport m = eval::compute_metrics(ev.confusion);
    EpochLog entry{epoch, train_loss, ev.loss, m.miou, m.mean_dice, lr};
    result.log.push_back(entry);
    if (ev.loss < best_loss) {
      best_loss = ev.loss;
      result.best = params.clone();
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(entry);
    return ev.loss;
  };

  record(0, std::numeric_limits<double>::quiet_NaN(), scheduler.lr());
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double lr = scheduler.lr();
    std::vector<std::pair<std::size_t, std::size_t>> order = pairs;
    std::mt19937_64 rng(derive_seed(Stream::kEpochOrder, {config.seed, epoch}));
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(per_epoch);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<dataio::Sample> samples;
      for (std::size_t i = start; i < end; ++i) {
        const auto [v, t] = order[i];
        const dataio::Video& video = train_videos[v];
        samples.push_back(dataio::augment(
            make_sample(video, t, variant), augment,
            derive_seed(Stream::kAugment, {config.seed, fnv1a(video.id), t, epoch})));
      }
      loss_sum += train_step(params, make_batch(samples, variant), model, config, variant, lr);
      ++batches;
    }
    const double val_loss = record(epoch, loss_sum / static_cast<double>(batches), lr);
    scheduler.step(val_loss);
  }
  return result;
}

void write_epoch_log(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write epoch log: " + path.string());
  out << "epoch,train_loss,val_loss,miou,dice,lr\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.val_loss)
        << ',' << format_double(e.miou) << ',' << format_double(e.dice) << ','
        << format_double(e.lr) << '\n';
  }
  if (!out) throw DataError("failed writing epoch log: " + path.string());
}

std::vector<EpochLog> read_epoch_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open epoch log: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "epoch,train_loss,val_loss,miou,dice,lr") {
    throw ParseError("unexpected epoch log header", 1);
  }
  std::vector<EpochLog> log;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    std::istringstream s(line);
    std::string f[6];
    for (auto& field : f) {
      if (!std::getline(s, field, ',')) throw ParseError("expected 6 fields", row);
    }
    try {
      log.push_back({std::stoul(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]),
                     std::stod(f[4]), std::stod(f[5])});
    } catch (const std::exception&) {
      throw ParseError("malformed epoch log field", row);
    }
  }
  return log;
}

}  // namespace fgseg::segnet
