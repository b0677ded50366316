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

#ifndef FGSEG_ERROR_HPP_
#define FGSEG_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fgseg {

// Root of the library's exception hierarchy. The CLI maps subclasses onto
// exit codes (DataError -> 2, everything else -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or extent mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced by an operation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid argument values (negative peak force, stride < 1, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

// Anything wrong with on-disk data: malformed files, misaligned sequences,
// unknown video ids, I/O failures.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class AlignmentError : public DataError {
 public:
  AlignmentError(std::size_t force_rows, std::size_t frames)
      : DataError("force/frame length mismatch: " + std::to_string(force_rows) +
                  " force rows vs " + std::to_string(frames) + " frames"),
        force_rows_(force_rows),
        frames_(frames) {}
  std::size_t force_rows() const { return force_rows_; }
  std::size_t frames() const { return frames_; }

 private:
  std::size_t force_rows_;
  std::size_t frames_;
};

// Unknown keys or unparsable values in a configuration file or override.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A phantom vessel would leave the image.
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace fgseg

#endif  // FGSEG_ERROR_HPP_
