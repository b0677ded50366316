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

// The shared plain-text configuration: INI-style sections [data], [phantom],
// [model], [train] and [eval] of "key = value" lines. Every key has a
// built-in default; a file and then "section.key=value" overrides are laid on
// top, and the fully resolved result is what gets written next to outputs.

#ifndef FGSEG_CONFIG_HPP_
#define FGSEG_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fgseg/dataio/augment.hpp"
#include "fgseg/phantom/phantom.hpp"
#include "fgseg/segnet/model.hpp"
#include "fgseg/segnet/train.hpp"

namespace fgseg {

struct RunConfig {
  // [data]
  dataio::AugmentConfig augment;
  std::size_t downsample_stride = 1;
  // [phantom]
  phantom::PhantomConfig phantom;
  std::size_t phantom_sequences = 160;
  std::uint64_t phantom_seed = 0;
  // [model]
  segnet::UNetConfig model;
  // [train]
  segnet::TrainConfig train;
  // [eval]
  std::vector<std::uint64_t> seeds{1, 2, 3};

  // Throws ValueError/GeometryError for inconsistent values.
  void validate() const;
};

// Defaults <- file (if given) <- overrides. Throws ConfigError on unknown
// sections/keys, malformed values or malformed overrides, DataError if the
// file cannot be read.
RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::string>& overrides = {});

// Applies one "section.key=value" override.
void apply_override(RunConfig& config, const std::string& assignment);

// Every key, in a fixed order, with shortest round-trip number formatting.
std::string to_ini(const RunConfig& config);
void write_run_config(const std::filesystem::path& path, const RunConfig& config);

// "1,2,3" -> {1, 2, 3}; empty items, signs and junk throw ConfigError.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace fgseg

#endif  // FGSEG_CONFIG_HPP_
