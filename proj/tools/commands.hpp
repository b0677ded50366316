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

// Subcommand implementations for the fgseg executable.

#ifndef FGSEG_TOOLS_COMMANDS_HPP_
#define FGSEG_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgseg::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kRunFailure = 3,
};

// Bad flags or flag combinations detected before any work starts.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::optional<std::string> config;
  std::vector<std::string> overrides;
  bool force = false;
};

struct GenPhantomOptions {
  CommonOptions common;
  std::string out;
  std::optional<std::size_t> sequences;
  std::optional<std::uint64_t> seed;
};

struct TrainOptions {
  CommonOptions common;
  std::string data;
  std::string variant;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct EvalOptions {
  CommonOptions common;
  std::string checkpoint;
  std::string data;
  std::string out;
};

struct AblateOptions {
  CommonOptions common;
  std::string data;
  std::optional<std::string> seeds;
  std::string out;
};

struct InspectOptions {
  std::string data;
  std::string video;
  std::optional<std::string> svg;
};

int run_gen_phantom(const GenPhantomOptions& o);
int run_train(const TrainOptions& o);
int run_eval(const EvalOptions& o);
int run_ablate(const AblateOptions& o);
int run_inspect_forces(const InspectOptions& o);

}  // namespace fgseg::cli

#endif  // FGSEG_TOOLS_COMMANDS_HPP_
