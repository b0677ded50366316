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

// Training samples and their joint augmentation.

#ifndef FGSEG_DATAIO_AUGMENT_HPP_
#define FGSEG_DATAIO_AUGMENT_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "fgseg/dataio/image.hpp"

namespace fgseg::dataio {

// The current frame with its label mask, the two key frames, and the three
// force magnitudes that drive the neck weights.
struct Sample {
  Image current;
  Image mask;
  Image key_min;
  Image key_max;
  double f_cur = 0.0;
  double f_min = 0.0;
  double f_max = 0.0;
  std::string sequence_id;
  std::size_t frame_index = 0;

  bool operator==(const Sample&) const = default;
};

// Ranges for the random transforms. Angles in degrees, translation as a
// fraction of the image extent, intensities in 8-bit levels.
struct AugmentConfig {
  bool enabled = true;
  double flip_probability = 0.5;  // separately for horizontal and vertical
  double max_rotation_deg = 15.0;
  double max_translation = 0.1;
  double min_gain = 0.8;
  double max_gain = 1.2;
  double max_offset = 10.0;
  double max_bias_coefficient = 0.2;
  double max_noise_sigma = 5.0;
};

// One draw of every transform parameter.
struct AugmentParams {
  bool flip_horizontal = false;
  bool flip_vertical = false;
  double rotation_rad = 0.0;
  double shift_x = 0.0;  // pixels
  double shift_y = 0.0;
  double gain = 1.0;
  double offset = 0.0;
  // Multiplicative field 1 + c0 X + c1 Y + c2 XY + c3 X^2 + c4 Y^2 over
  // normalised coordinates X, Y in [-1, 1].
  std::array<double, 5> bias{};
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;

  static AugmentParams identity() { return {}; }
};

AugmentParams draw_augmentation(const AugmentConfig& config, std::size_t height,
                                std::size_t width, std::uint64_t seed);

// Flip, rotation about the image centre and translation. Frames use bilinear
// interpolation, masks nearest neighbour; samples from outside the source
// become 0 (background).
Image warp_frame(const Image& frame, const AugmentParams& params);
Image warp_mask(const Image& mask, const AugmentParams& params);

// Gain/offset, bias field and additive Gaussian noise. Never applied to
// masks.
Image adjust_intensity(const Image& frame, const AugmentParams& params);

// Applies ONE parameter draw identically to the current frame, both key
// frames and (geometric part only) the mask. Pure function of its inputs.
Sample augment(const Sample& sample, const AugmentConfig& config, std::uint64_t seed);

}  // namespace fgseg::dataio

#endif  // FGSEG_DATAIO_AUGMENT_HPP_
