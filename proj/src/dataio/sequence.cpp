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

#include "fgseg/dataio/sequence.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fgseg/error.hpp"

namespace fgseg::dataio {

namespace fs = std::filesystem;

Video align(std::string id, ForceTrace trace, FrameSequence frames) {
  if (trace.size() != frames.size()) throw AlignmentError(trace.size(), frames.size());
  if (frames.size() == 0) throw DataError("empty sequence '" + id + "'");
  if (frames.has_masks() && frames.masks.size() != frames.size()) {
    throw DataError("video '" + id + "' has " + std::to_string(frames.masks.size()) +
                    " masks for " + std::to_string(frames.size()) + " frames");
  }
  const std::size_t h = frames.frames[0].height, w = frames.frames[0].width;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Image& f = frames.frames[i];
    if (f.height != h || f.width != w || f.empty()) {
      throw DataError("video '" + id + "': frame " + std::to_string(i) + " has size " +
                      std::to_string(f.height) + "x" + std::to_string(f.width) +
                      ", expected " + std::to_string(h) + "x" + std::to_string(w));
    }
    if (frames.has_masks()) {
      const Image& m = frames.masks[i];
      if (m.height != h || m.width != w) {
        throw DataError("video '" + id + "': mask " + std::to_string(i) + " size mismatch");
      }
      validate_mask(m);
    }
  }
  return Video{std::move(id), std::move(trace), std::move(frames)};
}

Video downsample(const Video& video, std::size_t stride) {
  if (stride < 1) throw ValueError("downsample stride must be >= 1");
  Video out;
  out.id = video.id;
  for (std::size_t i = 0; i < video.size(); i += stride) {
    out.forces.push_back(video.forces[i]);
    out.sequence.frames.push_back(video.sequence.frames[i]);
    if (video.sequence.has_masks()) out.sequence.masks.push_back(video.sequence.masks[i]);
  }
  return out;
}

const char* split_name(Split split) { return split == Split::kTrain ? "train" : "val"; }

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kValidation;
  throw DataError("unknown split '" + name + "' (expected train or val)");
}

const ManifestEntry& Manifest::find(const std::string& id) const {
  for (const auto& e : videos) {
    if (e.id == id) return e;
  }
  throw DataError("unknown video id '" + id + "'");
}

std::vector<ManifestEntry> Manifest::select(Split split) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : videos) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

Manifest load_manifest(const fs::path& root) {
  const fs::path path = root / kManifestName;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  Manifest manifest;
  bool saw_format = false;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", row);
    std::istringstream key_stream(line.substr(0, eq));
    std::string key;
    key_stream >> key;
    std::istringstream value(line.substr(eq + 1));
    if (key == "format") {
      std::string fmt;
      value >> fmt;
      if (fmt != "fgseg-manifest-1") throw ParseError("unsupported manifest format", row);
      saw_format = true;
    } else if (key == "video") {
      ManifestEntry e;
      std::string split, extra;
      if (!(value >> e.id >> e.frames >> e.force_file >> split) || (value >> extra)) {
        throw ParseError("expected 'video = <id> <frames> <force file> <split>'", row);
      }
      e.split = parse_split(split);
      for (const auto& existing : manifest.videos) {
        if (existing.id == e.id) throw ParseError("duplicate video id '" + e.id + "'", row);
      }
      manifest.videos.push_back(std::move(e));
    } else {
      throw ParseError("unknown manifest key '" + key + "'", row);
    }
  }
  if (!saw_format) throw DataError("manifest lacks a format line: " + path.string());
  return manifest;
}

void save_manifest(const fs::path& root, const Manifest& manifest) {
  const fs::path path = root / kManifestName;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  out << "format = fgseg-manifest-1\n";
  out << "# video = <id> <frames> <force file> <split>\n";
  for (const auto& e : manifest.videos) {
    out << "video = " << e.id << ' ' << e.frames << ' ' << e.force_file << ' '
        << split_name(e.split) << '\n';
  }
  if (!out) throw DataError("failed writing manifest: " + path.string());
}

std::string frame_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.png", index);
  return buf;
}

Video load_video(const fs::path& root, const ManifestEntry& entry) {
  ForceTrace trace = load_force_csv(root / entry.force_file);
  const fs::path dir = root / entry.id;
  FrameSequence seq;
  for (std::size_t i = 0;; ++i) {
    const fs::path f = dir / "frames" / frame_file_name(i);
    if (!fs::exists(f)) break;
    seq.frames.push_back(read_png(f));
  }
  if (seq.frames.size() != entry.frames) {
    throw DataError("video '" + entry.id + "': manifest lists " + std::to_string(entry.frames) +
                    " frames, found " + std::to_string(seq.frames.size()));
  }
  if (fs::exists(dir / "masks")) {
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
      seq.masks.push_back(read_png(dir / "masks" / frame_file_name(i)));
    }
  }
  return align(entry.id, std::move(trace), std::move(seq));
}

std::vector<Video> load_split(const fs::path& root, const Manifest& manifest, Split split) {
  std::vector<Video> out;
  for (const auto& e : manifest.select(split)) out.push_back(load_video(root, e));
  return out;
}

void save_video(const fs::path& root, const Video& video) {
  const fs::path dir = root / video.id;
  std::error_code ec;
  fs::create_directories(dir / "frames", ec);
  if (video.sequence.has_masks()) fs::create_directories(dir / "masks", ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  save_force_csv(dir / "force.csv", video.forces);
  for (std::size_t i = 0; i < video.size(); ++i) {
    write_png(dir / "frames" / frame_file_name(i), video.sequence.frames[i]);
    if (video.sequence.has_masks()) {
      write_png(dir / "masks" / frame_file_name(i), video.sequence.masks[i]);
    }
  }
}

}  // namespace fgseg::dataio
