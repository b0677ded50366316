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

#include <CLI11.hpp>

#include <exception>
#include <iostream>

#include "commands.hpp"
#include "fgseg/error.hpp"

namespace {

using namespace fgseg::cli;

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "INI run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.overrides, "Override a config key, e.g. train.learning_rate=1e-4")
      ->take_all()
      ->allow_extra_args(false);
  cmd->add_flag("--force", o.force, "Overwrite a non-empty output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Force-guided artery/vein segmentation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fgseg 1.0.0");

  GenPhantomOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-phantom", "Generate a synthetic phantom dataset");
  add_common(gen_cmd, gen.common);
  gen_cmd->add_option("--out", gen.out, "Output dataset directory")->required();
  gen_cmd->add_option("--sequences", gen.sequences, "Number of sequences");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train one model variant");
  add_common(train_cmd, train.common);
  train_cmd->add_option("--data", train.data, "Dataset directory")->required();
  train_cmd->add_option("--variant", train.variant,
                        "baseline | fg_wo_kfs_fbw | fg_wo_fbw | fg_full")
      ->required();
  train_cmd->add_option("--seed", train.seed, "Training seed");
  train_cmd->add_option("--out", train.out, "Output run directory")->required();

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the validation split");
  add_common(eval_cmd, ev.common);
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset directory")->required();
  eval_cmd->add_option("--out", ev.out, "Output directory")->required();

  AblateOptions ab;
  auto* ablate_cmd = app.add_subcommand("ablate", "Train and compare all variants over seeds");
  add_common(ablate_cmd, ab.common);
  ablate_cmd->add_option("--data", ab.data, "Dataset directory")->required();
  ablate_cmd->add_option("--seeds", ab.seeds, "Comma-separated seeds, e.g. 1,2,3");
  ablate_cmd->add_option("--out", ab.out, "Output directory")->required();

  InspectOptions in;
  auto* inspect_cmd =
      app.add_subcommand("inspect-forces", "Print a force trace with its key frames and weights");
  inspect_cmd->add_option("--data", in.data, "Dataset directory")->required();
  inspect_cmd->add_option("--video", in.video, "Video id")->required();
  inspect_cmd->add_option("--svg", in.svg, "Plot path (default <video>_forces.svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) return run_gen_phantom(gen);
    if (*train_cmd) return run_train(train);
    if (*eval_cmd) return run_eval(ev);
    if (*ablate_cmd) return run_ablate(ab);
    if (*inspect_cmd) return run_inspect_forces(in);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const fgseg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const fgseg::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const fgseg::ValueError& e) {
    std::cerr << "invalid value: " << e.what() << "\n";
    return kUsage;
  } catch (const fgseg::GeometryError& e) {
    std::cerr << "invalid phantom geometry: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kRunFailure;
  }
  return kUsage;
}
