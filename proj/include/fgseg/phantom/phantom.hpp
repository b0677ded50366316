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

// Synthetic force-coupled vessel phantom. The vein's vertical semi-axis
// shrinks linearly with probe force down to a collapse floor; the artery
// barely deforms. Images are a vertical intensity ramp with dark vessels and
// multiplicative log-normal speckle.

#ifndef FGSEG_PHANTOM_PHANTOM_HPP_
#define FGSEG_PHANTOM_PHANTOM_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>

#include "fgseg/dataio/force.hpp"
#include "fgseg/dataio/image.hpp"
#include "fgseg/dataio/sequence.hpp"

namespace fgseg::phantom {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Vessel placement at zero force, in pixels (pixel centres at i + 0.5).
struct VesselGeometry {
  double artery_x = 18.0, artery_y = 30.0, artery_radius = 6.5;
  double vein_x = 46.0, vein_y = 30.0, vein_a = 7.0, vein_b = 7.0;
};

struct PhantomConfig {
  std::size_t image_size = 64;
  std::size_t frames = 12;
  double peak_force = 5.0;    // newtons
  double force_jitter = 0.05; // std of additive noise on fz (and fx, fy, moments)
  double vein_compliance = 0.17;    // fractional minor-axis loss per newton
  double artery_compliance = 0.005; // fractional radius loss per newton
  double collapse_fraction = 0.15;
  double background_level = 120.0;  // intensity at the top row
  double background_ramp = 30.0;    // added linearly towards the bottom
  double vessel_level = 40.0;
  double speckle = 0.35;            // std of the log-intensity noise

  // Per-sequence geometry ranges. Artery and vein occupy the two horizontal
  // slots, assigned at random.
  Range artery_radius{5.0, 8.0};
  Range vein_semi_axis{5.0, 9.0};
  Range center_y{24.0, 36.0};
  Range left_slot_x{14.0, 22.0};
  Range right_slot_x{42.0, 50.0};

  double validation_fraction = 0.25;

  // Throws ValueError for inconsistent values and GeometryError if the
  // ranges allow a vessel outside the image at zero force.
  void validate() const;
};

// |fz| follows peak * sin(pi t / (length - 1)) plus seeded jitter; the other
// five channels are small noise. Throws ValueError if length < 3 or peak <= 0.
dataio::ForceTrace force_profile(std::size_t length, double peak, double jitter,
                                 std::uint64_t seed);

// Deformed sizes at a given force.
double vein_minor_axis(const PhantomConfig& config, const VesselGeometry& g, double force);
double artery_radius(const PhantomConfig& config, const VesselGeometry& g, double force);

// Renders frame and mask. Throws ValueError for negative force and
// GeometryError if a deformed vessel leaves the image or vanishes.
std::pair<dataio::Image, dataio::Image> render_frame(const PhantomConfig& config,
                                                     const VesselGeometry& geometry,
                                                     double force_z, std::uint64_t seed);

VesselGeometry draw_geometry(const PhantomConfig& config, std::uint64_t seed);

// One complete video with id "seq_NNNN".
dataio::Video generate_sequence(const PhantomConfig& config, std::size_t index,
                                std::uint64_t seed);

// Writes n_sequences videos plus the manifest under `root`. The last
// round(n * validation_fraction) videos form the validation split. Each
// sequence draws from its own seed derived from (seed, index).
dataio::Manifest generate_dataset(const PhantomConfig& config, std::size_t n_sequences,
                                  std::uint64_t seed, const std::filesystem::path& root);

}  // namespace fgseg::phantom

#endif  // FGSEG_PHANTOM_PHANTOM_HPP_
