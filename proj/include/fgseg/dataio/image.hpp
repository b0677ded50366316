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

#ifndef FGSEG_DATAIO_IMAGE_HPP_
#define FGSEG_DATAIO_IMAGE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace fgseg::dataio {

// 8-bit single-channel raster, row-major. Used both for grayscale frames and
// for label masks (0 background, 1 artery, 2 vein).
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(std::size_t h, std::size_t w, std::uint8_t fill = 0)
      : height(h), width(w), pixels(h * w, fill) {}

  std::uint8_t& at(std::size_t y, std::size_t x) { return pixels[y * width + x]; }
  std::uint8_t at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
  bool empty() const { return pixels.empty(); }

  bool operator==(const Image&) const = default;
};

inline constexpr std::uint8_t kBackground = 0;
inline constexpr std::uint8_t kArtery = 1;
inline constexpr std::uint8_t kVein = 2;
inline constexpr std::size_t kNumClasses = 3;

// 8-bit grayscale PNG. Reading accepts any bit depth / color type that
// libpng can reduce to 8-bit gray; writing always emits 8-bit gray with no
// timestamp chunk, so identical images give identical files.
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

// Throws DataError if any pixel is not a valid class label.
void validate_mask(const Image& mask);

}  // namespace fgseg::dataio

#endif  // FGSEG_DATAIO_IMAGE_HPP_
