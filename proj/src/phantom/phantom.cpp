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

#include "fgseg/phantom/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "fgseg/error.hpp"
#include "fgseg/random.hpp"

namespace fgseg::phantom {

namespace {

double draw(std::mt19937_64& rng, const Range& r) {
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

void check_inside(const PhantomConfig& c, double x, double y, double half_w, double half_h,
                  const char* what) {
  const double size = static_cast<double>(c.image_size);
  if (x - half_w < 0.0 || x + half_w > size || y - half_h < 0.0 || y + half_h > size) {
    throw GeometryError(std::string(what) + " extends outside the " + std::to_string(c.image_size) +
                        "-pixel image");
  }
}

}  // namespace

void PhantomConfig::validate() const {
  if (image_size < 8) throw ValueError("phantom image_size must be >= 8");
  if (frames < 3) throw ValueError("phantom frames must be >= 3");
  if (!(peak_force > 0.0)) throw ValueError("phantom peak_force must be positive");
  if (force_jitter < 0.0) throw ValueError("phantom force_jitter must be >= 0");
  if (!(vein_compliance > artery_compliance) || artery_compliance < 0.0) {
    throw ValueError("phantom compliances must satisfy vein > artery >= 0");
  }
  if (!(collapse_fraction > 0.0 && collapse_fraction <= 1.0)) {
    throw ValueError("phantom collapse_fraction must lie in (0, 1]");
  }
  if (speckle < 0.0) throw ValueError("phantom speckle must be >= 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ValueError("phantom validation_fraction must lie in [0, 1)");
  }
  for (const Range* r :
       {&artery_radius, &vein_semi_axis, &center_y, &left_slot_x, &right_slot_x}) {
    if (r->lo > r->hi) throw ValueError("phantom range with lo > hi");
  }
  if (artery_radius.lo <= 0.0 || vein_semi_axis.lo <= 0.0) {
    throw ValueError("phantom vessel sizes must be positive");
  }
  const double reach = std::max(artery_radius.hi, vein_semi_axis.hi);
  const double size = static_cast<double>(image_size);
  for (const Range* slot : {&left_slot_x, &right_slot_x}) {
    if (slot->lo - reach < 0.0 || slot->hi + reach > size) {
      throw GeometryError("phantom slot ranges let a vessel leave the image");
    }
  }
  if (center_y.lo - reach < 0.0 || center_y.hi + reach > size) {
    throw GeometryError("phantom centre_y range lets a vessel leave the image");
  }
}

dataio::ForceTrace force_profile(std::size_t length, double peak, double jitter,
                                 std::uint64_t seed) {
  if (length < 3) throw ValueError("force profile length must be >= 3");
  if (!(peak > 0.0)) throw ValueError("force profile peak must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, jitter > 0.0 ? jitter : 1.0);
  auto n = [&] { return jitter > 0.0 ? noise(rng) : 0.0; };
  dataio::ForceTrace trace(length);
  for (std::size_t t = 0; t < length; ++t) {
    const double phase = std::numbers::pi * static_cast<double>(t) / static_cast<double>(length - 1);
    auto& r = trace[t];
    r.fz = std::fabs(peak * std::sin(phase) + n());
    r.fx = n();
    r.fy = n();
    r.mx = 0.1 * n();
    r.my = 0.1 * n();
    r.mz = 0.1 * n();
  }
  return trace;
}

double vein_minor_axis(const PhantomConfig& config, const VesselGeometry& g, double force) {
  return g.vein_b * std::max(1.0 - config.vein_compliance * force, config.collapse_fraction);
}

double artery_radius(const PhantomConfig& config, const VesselGeometry& g, double force) {
  return g.artery_radius * (1.0 - config.artery_compliance * force);
}

std::pair<dataio::Image, dataio::Image> render_frame(const PhantomConfig& config,
                                                     const VesselGeometry& geometry,
                                                     double force_z, std::uint64_t seed) {
  if (!(force_z >= 0.0) || !std::isfinite(force_z)) {
    throw ValueError("render_frame: force must be finite and >= 0");
  }
  const double r = artery_radius(config, geometry, force_z);
  const double b = vein_minor_axis(config, geometry, force_z);
  if (!(r > 0.0)) throw GeometryError("artery radius vanishes at this force");
  check_inside(config, geometry.artery_x, geometry.artery_y, r, r, "artery");
  check_inside(config, geometry.vein_x, geometry.vein_y, geometry.vein_a, b, "vein");

  const std::size_t n = config.image_size;
  dataio::Image image(n, n), mask(n, n, dataio::kBackground);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> speckle(0.0, 1.0);
  for (std::size_t y = 0; y < n; ++y) {
    const double cy = static_cast<double>(y) + 0.5;
    for (std::size_t x = 0; x < n; ++x) {
      const double cx = static_cast<double>(x) + 0.5;
      const double ax = cx - geometry.artery_x, ay = cy - geometry.artery_y;
      const double vx = (cx - geometry.vein_x) / geometry.vein_a;
      const double vy = (cy - geometry.vein_y) / b;
      std::uint8_t label = dataio::kBackground;
      if (ax * ax + ay * ay <= r * r) label = dataio::kArtery;
      if (vx * vx + vy * vy <= 1.0) label = dataio::kVein;
      mask.at(y, x) = label;
      const double base =
          label == dataio::kBackground
              ? config.background_level +
                    config.background_ramp * static_cast<double>(y) / static_cast<double>(n)
              : config.vessel_level;
      const double v = base * std::exp(config.speckle * speckle(rng));
      image.at(y, x) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return {std::move(image), std::move(mask)};
}

VesselGeometry draw_geometry(const PhantomConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  VesselGeometry g;
  g.artery_radius = draw(rng, config.artery_radius);
  g.vein_a = draw(rng, config.vein_semi_axis);
  g.vein_b = draw(rng, config.vein_semi_axis);
  g.artery_y = draw(rng, config.center_y);
  g.vein_y = draw(rng, config.center_y);
  const double left = draw(rng, config.left_slot_x);
  const double right = draw(rng, config.right_slot_x);
  const bool artery_left = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.5;
  g.artery_x = artery_left ? left : right;
  g.vein_x = artery_left ? right : left;
  return g;
}

dataio::Video generate_sequence(const PhantomConfig& config, std::size_t index,
                                std::uint64_t seed) {
  const VesselGeometry g = draw_geometry(config, derive_seed(Stream::kPhantomGeometry, {seed, index}));
  dataio::ForceTrace forces =
      force_profile(config.frames, config.peak_force, config.force_jitter,
                    derive_seed(Stream::kPhantomForce, {seed, index}));
  dataio::FrameSequence seq;
  for (std::size_t t = 0; t < forces.size(); ++t) {
    auto [image, mask] = render_frame(config, g, forces[t].magnitude(),
                                      derive_seed(Stream::kPhantomFrame, {seed, index, t}));
    seq.frames.push_back(std::move(image));
    seq.masks.push_back(std::move(mask));
  }
  char id[32];
  std::snprintf(id, sizeof(id), "seq_%04zu", index);
  return dataio::align(id, std::move(forces), std::move(seq));
}

dataio::Manifest generate_dataset(const PhantomConfig& config, std::size_t n_sequences,
                                  std::uint64_t seed, const std::filesystem::path& root) {
  config.validate();
  if (n_sequences < 1) throw ValueError("generate_dataset needs at least one sequence");
  const auto n_val = static_cast<std::size_t>(
      std::lround(config.validation_fraction * static_cast<double>(n_sequences)));
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) throw DataError("cannot create " + root.string() + ": " + ec.message());
  dataio::Manifest manifest;
  for (std::size_t i = 0; i < n_sequences; ++i) {
    const dataio::Video video = generate_sequence(config, i, seed);
    dataio::save_video(root, video);
    manifest.videos.push_back({video.id, video.size(), video.id + "/force.csv",
                               i + n_val >= n_sequences ? dataio::Split::kValidation
                                                        : dataio::Split::kTrain});
  }
  dataio::save_manifest(root, manifest);
  return manifest;
}

}  // namespace fgseg::phantom
