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

#include "fgseg/dataio/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fgseg/error.hpp"

namespace fgseg::dataio {

namespace {

// Maps an output pixel centre back to source coordinates (pixel centres at
// i + 0.5).
struct InverseMap {
  double cx, cy, cos_t, sin_t;
  const AugmentParams& p;

  InverseMap(std::size_t h, std::size_t w, const AugmentParams& params)
      : cx(0.5 * static_cast<double>(w)),
        cy(0.5 * static_cast<double>(h)),
        cos_t(std::cos(params.rotation_rad)),
        sin_t(std::sin(params.rotation_rad)),
        p(params) {}

  void operator()(double ox, double oy, double& sx, double& sy) const {
    const double u = ox - cx - p.shift_x, v = oy - cy - p.shift_y;
    // Rotate by -theta.
    double ru = cos_t * u + sin_t * v;
    double rv = -sin_t * u + cos_t * v;
    if (p.flip_horizontal) ru = -ru;
    if (p.flip_vertical) rv = -rv;
    sx = ru + cx;
    sy = rv + cy;
  }
};

void check(const Image& image) {
  if (image.empty() || image.pixels.size() != image.height * image.width) {
    throw ValueError("cannot augment an empty or inconsistent image");
  }
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

AugmentParams draw_augmentation(const AugmentConfig& config, std::size_t height,
                                std::size_t width, std::uint64_t seed) {
  AugmentParams p;
  if (!config.enabled) return p;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  p.flip_horizontal = unit(rng) < config.flip_probability;
  p.flip_vertical = unit(rng) < config.flip_probability;
  const double max_rot = config.max_rotation_deg * std::numbers::pi / 180.0;
  p.rotation_rad = uniform(-max_rot, max_rot);
  p.shift_x = uniform(-config.max_translation, config.max_translation) * static_cast<double>(width);
  p.shift_y =
      uniform(-config.max_translation, config.max_translation) * static_cast<double>(height);
  p.gain = uniform(config.min_gain, config.max_gain);
  p.offset = uniform(-config.max_offset, config.max_offset);
  for (double& c : p.bias) {
    c = uniform(-config.max_bias_coefficient, config.max_bias_coefficient);
  }
  p.noise_sigma = uniform(0.0, config.max_noise_sigma);
  p.noise_seed = rng();
  return p;
}

Image warp_frame(const Image& frame, const AugmentParams& params) {
  check(frame);
  const InverseMap map(frame.height, frame.width, params);
  const long h = static_cast<long>(frame.height), w = static_cast<long>(frame.width);
  Image out(frame.height, frame.width);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double sx, sy;
      map(x + 0.5, y + 0.5, sx, sy);
      if (sx < 0.0 || sy < 0.0 || sx > static_cast<double>(w) || sy > static_cast<double>(h)) {
        continue;
      }
      // Bilinear over the four nearest centres, clamping at the border.
      const double fx = sx - 0.5, fy = sy - 0.5;
      const long x0 = static_cast<long>(std::floor(fx)), y0 = static_cast<long>(std::floor(fy));
      const double ax = fx - static_cast<double>(x0), ay = fy - static_cast<double>(y0);
      auto px = [&](long yy, long xx) {
        yy = std::clamp(yy, 0L, h - 1);
        xx = std::clamp(xx, 0L, w - 1);
        return static_cast<double>(frame.at(static_cast<std::size_t>(yy),
                                            static_cast<std::size_t>(xx)));
      };
      const double v = (1 - ay) * ((1 - ax) * px(y0, x0) + ax * px(y0, x0 + 1)) +
                       ay * ((1 - ax) * px(y0 + 1, x0) + ax * px(y0 + 1, x0 + 1));
      out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = to_byte(v);
    }
  }
  return out;
}

Image warp_mask(const Image& mask, const AugmentParams& params) {
  check(mask);
  const InverseMap map(mask.height, mask.width, params);
  const long h = static_cast<long>(mask.height), w = static_cast<long>(mask.width);
  Image out(mask.height, mask.width, kBackground);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double sx, sy;
      map(x + 0.5, y + 0.5, sx, sy);
      const long ix = static_cast<long>(std::floor(sx)), iy = static_cast<long>(std::floor(sy));
      if (ix < 0 || iy < 0 || ix >= w || iy >= h) continue;
      out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) =
          mask.at(static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
    }
  }
  return out;
}

Image adjust_intensity(const Image& frame, const AugmentParams& params) {
  check(frame);
  std::mt19937_64 rng(params.noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Image out(frame.height, frame.width);
  const double sx = frame.width > 1 ? 2.0 / static_cast<double>(frame.width - 1) : 0.0;
  const double sy = frame.height > 1 ? 2.0 / static_cast<double>(frame.height - 1) : 0.0;
  const auto& c = params.bias;
  for (std::size_t y = 0; y < frame.height; ++y) {
    const double Y = static_cast<double>(y) * sy - 1.0;
    for (std::size_t x = 0; x < frame.width; ++x) {
      const double X = static_cast<double>(x) * sx - 1.0;
      const double field =
          std::max(0.0, 1.0 + c[0] * X + c[1] * Y + c[2] * X * Y + c[3] * X * X + c[4] * Y * Y);
      double v = (params.gain * frame.at(y, x) + params.offset) * field;
      if (params.noise_sigma > 0.0) v += params.noise_sigma * noise(rng);
      out.at(y, x) = to_byte(v);
    }
  }
  return out;
}

Sample augment(const Sample& sample, const AugmentConfig& config, std::uint64_t seed) {
  if (sample.mask.empty()) throw ValueError("augment requires a labelled sample");
  if (!config.enabled) return sample;
  const AugmentParams p =
      draw_augmentation(config, sample.current.height, sample.current.width, seed);
  Sample out = sample;
  out.current = adjust_intensity(warp_frame(sample.current, p), p);
  out.key_min = adjust_intensity(warp_frame(sample.key_min, p), p);
  out.key_max = adjust_intensity(warp_frame(sample.key_max, p), p);
  out.mask = warp_mask(sample.mask, p);
  return out;
}

}  // namespace fgseg::dataio
