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

// Named-tensor container. Layout (all integers little-endian) is documented
// in docs/checkpoint_format.md:
//
//   "FGSEGCK1" | u32 version | u32 meta_len | meta bytes | u32 count |
//   count x ( u32 name_len | name | u32 rank | u64 dims[rank] | f64 values )

#ifndef FGSEG_TENSOR_CHECKPOINT_HPP_
#define FGSEG_TENSOR_CHECKPOINT_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fgseg/tensor/tensor.hpp"

namespace fgseg {

struct Checkpoint {
  // Free-form key/value pairs; stored as "key=value\n" lines sorted by key.
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fgseg

#endif  // FGSEG_TENSOR_CHECKPOINT_HPP_
