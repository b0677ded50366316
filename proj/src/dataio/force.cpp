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

#include "fgseg/dataio/force.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "fgseg/error.hpp"

namespace fgseg::dataio {

double ForceRecord::magnitude() const { return std::fabs(fz); }

std::vector<double> magnitudes(const ForceTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto& r : trace) out.push_back(r.magnitude());
  return out;
}

namespace {

double parse_field(std::string_view text, std::size_t row) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    throw ParseError("malformed force field '" + std::string(text) + "'", row);
  }
  if (!std::isfinite(value)) throw ParseError("non-finite force field", row);
  return value;
}

}  // namespace

ForceTrace load_force_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open force file: " + path.string());
  ForceTrace trace;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    double fields[6];
    std::size_t count = 0, start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view field =
          std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start);
      if (count == 6) {
        throw ParseError("expected 6 fields in " + path.string(), row);
      }
      fields[count++] = parse_field(field, row);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (count != 6) {
      throw ParseError("expected 6 fields, got " + std::to_string(count) + " in " +
                           path.string(),
                       row);
    }
    trace.push_back({fields[0], fields[1], fields[2], fields[3], fields[4], fields[5]});
  }
  if (trace.empty()) throw ParseError("empty force file " + path.string(), 1);
  return trace;
}

void save_force_csv(const std::filesystem::path& path, const ForceTrace& trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write force file: " + path.string());
  char buf[256];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof(buf), "%.*f,%.*f,%.*f,%.*f,%.*f,%.*f\n", kForceDecimals, r.fx,
                  kForceDecimals, r.fy, kForceDecimals, r.fz, kForceDecimals, r.mx,
                  kForceDecimals, r.my, kForceDecimals, r.mz);
    out << buf;
  }
  if (!out) throw DataError("failed writing force file: " + path.string());
}

}  // namespace fgseg::dataio
