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

// Paired frame sequences and force traces, plus the on-disk dataset layout:
//
//   <root>/manifest.txt
//   <root>/<video>/force.csv
//   <root>/<video>/frames/000000.png ...
//   <root>/<video>/masks/000000.png ...

#ifndef FGSEG_DATAIO_SEQUENCE_HPP_
#define FGSEG_DATAIO_SEQUENCE_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "fgseg/dataio/force.hpp"
#include "fgseg/dataio/image.hpp"

namespace fgseg::dataio {

// Frames of one video, all of identical size; masks are either empty or one
// per frame.
struct FrameSequence {
  std::vector<Image> frames;
  std::vector<Image> masks;

  std::size_t size() const { return frames.size(); }
  bool has_masks() const { return !masks.empty(); }
};

// A frame sequence whose force trace has been checked to match it.
struct Video {
  std::string id;
  ForceTrace forces;
  FrameSequence sequence;

  std::size_t size() const { return sequence.size(); }
};

// Pairs a trace with its frames. Throws AlignmentError on a length mismatch,
// DataError on an empty sequence, inconsistent frame sizes, or invalid masks.
Video align(std::string id, ForceTrace trace, FrameSequence frames);

// Keeps frames 0, stride, 2*stride, ... together with their force rows.
Video downsample(const Video& video, std::size_t stride);

enum class Split { kTrain, kValidation };

const char* split_name(Split split);
Split parse_split(const std::string& name);

struct ManifestEntry {
  std::string id;
  std::size_t frames = 0;
  std::string force_file;  // relative to the dataset root
  Split split = Split::kTrain;

  bool operator==(const ManifestEntry&) const = default;
};

// Plain-text key/value manifest. One "video = <id> <frames> <force file>
// <split>" line per video plus a "format = fgseg-manifest-1" line; '#' starts
// a comment.
struct Manifest {
  std::vector<ManifestEntry> videos;

  const ManifestEntry& find(const std::string& id) const;  // DataError if absent
  std::vector<ManifestEntry> select(Split split) const;
};

inline constexpr const char* kManifestName = "manifest.txt";

Manifest load_manifest(const std::filesystem::path& root);
void save_manifest(const std::filesystem::path& root, const Manifest& manifest);

// "000042.png"
std::string frame_file_name(std::size_t index);

// Reads the entry's force trace, frames and (if present) masks and aligns
// them. The frame count in the manifest must match what is on disk.
Video load_video(const std::filesystem::path& root, const ManifestEntry& entry);
std::vector<Video> load_split(const std::filesystem::path& root, const Manifest& manifest,
                              Split split);

// Writes force.csv, frames/ and masks/ under <root>/<video.id>.
void save_video(const std::filesystem::path& root, const Video& video);

}  // namespace fgseg::dataio

#endif  // FGSEG_DATAIO_SEQUENCE_HPP_
