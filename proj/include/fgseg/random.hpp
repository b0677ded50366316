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

// Seed derivation. Every random stream in the project is seeded from the
// global seed plus the indices that identify its consumer, mixed through
// std::seed_seq, so streams are independent and reproducible.

#ifndef FGSEG_RANDOM_HPP_
#define FGSEG_RANDOM_HPP_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace fgseg {

// Stream tags keep different consumers of the same indices apart.
enum class Stream : std::uint64_t {
  kPhantomGeometry = 1,
  kPhantomForce = 2,
  kPhantomFrame = 3,
  kInit = 4,
  kNeckInit = 5,
  kEpochOrder = 6,
  kAugment = 7,
};

inline std::uint64_t derive_seed(Stream stream, std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  words.push_back(static_cast<std::uint32_t>(stream));
  for (std::uint64_t p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace fgseg

#endif  // FGSEG_RANDOM_HPP_
