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

// Per-frame force/torque records and their comma-separated on-disk form.

#ifndef FGSEG_DATAIO_FORCE_HPP_
#define FGSEG_DATAIO_FORCE_HPP_

#include <filesystem>
#include <vector>

namespace fgseg::dataio {

// One sensor sample: forces in newtons, moments in newton-meters.
struct ForceRecord {
  double fx = 0.0, fy = 0.0, fz = 0.0;
  double mx = 0.0, my = 0.0, mz = 0.0;

  // Probe pressure magnitude used throughout: |fz|.
  double magnitude() const;

  bool operator==(const ForceRecord&) const = default;
};

// Row i belongs to frame i.
using ForceTrace = std::vector<ForceRecord>;

std::vector<double> magnitudes(const ForceTrace& trace);

// Reads "fx,fy,fz,mx,my,mz" rows. Blank lines are not allowed. Throws
// ParseError (with a 1-based row number) on malformed or non-finite fields
// and on an empty file.
ForceTrace load_force_csv(const std::filesystem::path& path);

// Writes every field with kForceDecimals digits after the decimal point, so
// load -> save of a file written here reproduces it byte for byte.
void save_force_csv(const std::filesystem::path& path, const ForceTrace& trace);

inline constexpr int kForceDecimals = 6;

}  // namespace fgseg::dataio

#endif  // FGSEG_DATAIO_FORCE_HPP_
