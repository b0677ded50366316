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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "fgseg/config.hpp"
#include "fgseg/dataio/sequence.hpp"
#include "fgseg/error.hpp"
#include "fgseg/eval/ablation.hpp"
#include "fgseg/forcekeys/forcekeys.hpp"
#include "fgseg/phantom/phantom.hpp"
#include "fgseg/segnet/train.hpp"
#include "fgseg/tensor/checkpoint.hpp"

namespace fgseg::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kIncompleteMarker = "INCOMPLETE";

RunConfig resolve(const CommonOptions& o) {
  std::optional<fs::path> file;
  if (o.config) file = *o.config;
  RunConfig c = load_run_config(file, o.overrides);
  return c;
}

// Refuses to write into a non-empty directory unless --force was given.
void prepare_output(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_directory(dir)) {
    throw UsageError(dir.string() + " exists and is not a directory");
  }
  if (fs::exists(dir) && !fs::is_empty(dir) && !force) {
    throw UsageError(dir.string() + " is not empty; pass --force to overwrite");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<dataio::Video> load(const fs::path& root, const dataio::Manifest& manifest,
                                dataio::Split split, std::size_t stride) {
  std::vector<dataio::Video> videos = dataio::load_split(root, manifest, split);
  if (stride > 1) {
    for (auto& v : videos) v = dataio::downsample(v, stride);
  }
  return videos;
}

// "[model]" section of the resolved config as "model.key" -> value pairs.
std::map<std::string, std::string> model_section(const RunConfig& config) {
  std::map<std::string, std::string> out;
  std::istringstream in(to_ini(config));
  std::string line;
  bool inside = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '[') {
      inside = line == "[model]";
      continue;
    }
    const auto eq = line.find(" = ");
    if (inside && eq != std::string::npos) {
      out["model." + line.substr(0, eq)] = line.substr(eq + 3);
    }
  }
  return out;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void print_epoch(const segnet::EpochLog& e) {
  std::cerr << "  epoch " << e.epoch << "  train_loss "
            << (std::isnan(e.train_loss) ? std::string("-") : fmt(e.train_loss)) << "  val_loss "
            << fmt(e.val_loss) << "  mIoU " << fmt(e.miou) << "  dice " << fmt(e.dice) << "  lr "
            << e.lr << "\n";
}

std::string force_plot_svg(const std::string& video, const std::vector<double>& f,
                           const forcekeys::KeyFrameSelection& sel) {
  constexpr double kLeft = 50, kTop = 30, kW = 480, kH = 220;
  const double fmax = std::max(sel.f_max, 1e-9) * 1.1;
  const double n = static_cast<double>(std::max<std::size_t>(f.size(), 2) - 1);
  auto px = [&](std::size_t t) { return kLeft + kW * static_cast<double>(t) / n; };
  auto py = [&](double v) { return kTop + kH * (1.0 - v / fmax); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kLeft + kW + 30 << "\" height=\""
    << kTop + kH + 50 << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"14\">|fz| for " << video
    << " (blue: K_min, red: K_max)</text>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + kH << "\" x2=\"" << kLeft + kW << "\" y2=\""
    << kTop + kH << "\" stroke=\"#000\"/>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
    << kTop + kH << "\" stroke=\"#000\"/>\n";
  s << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(py(sel.f_max) + 4, 1)
    << "\" text-anchor=\"end\">" << fmt(sel.f_max, 2) << "</text>\n";
  s << "<text x=\"" << kLeft + kW / 2 << "\" y=\"" << kTop + kH + 36
    << "\" text-anchor=\"middle\">frame</text>\n";
  s << "<polyline fill=\"none\" stroke=\"#333\" points=\"";
  for (std::size_t t = 0; t < f.size(); ++t) {
    s << (t ? " " : "") << fmt(px(t), 1) << "," << fmt(py(f[t]), 1);
  }
  s << "\"/>\n";
  for (std::size_t t = 0; t < f.size(); ++t) {
    const char* color = t == sel.idx_min ? "#1f5fd0" : t == sel.idx_max ? "#d0301f" : "#333";
    const double r = (t == sel.idx_min || t == sel.idx_max) ? 5 : 2.5;
    s << "<circle cx=\"" << fmt(px(t), 1) << "\" cy=\"" << fmt(py(f[t]), 1) << "\" r=\"" << r
      << "\" fill=\"" << color << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace

int run_gen_phantom(const GenPhantomOptions& o) {
  RunConfig config = resolve(o.common);
  if (o.sequences) config.phantom_sequences = *o.sequences;
  if (o.seed) config.phantom_seed = *o.seed;
  if (config.phantom_sequences < 1) throw UsageError("--sequences must be at least 1");
  config.phantom.validate();
  const fs::path out(o.out);
  prepare_output(out, o.common.force);
  const dataio::Manifest m =
      phantom::generate_dataset(config.phantom, config.phantom_sequences, config.phantom_seed, out);
  write_run_config(out / "run_config.ini", config);
  std::cout << "wrote " << m.videos.size() << " sequences (" << m.select(dataio::Split::kTrain).size()
            << " train, " << m.select(dataio::Split::kValidation).size() << " val) to "
            << out.string() << "\n";
  return kOk;
}

int run_train(const TrainOptions& o) {
  RunConfig config = resolve(o.common);
  segnet::Variant variant;
  try {
    variant = segnet::parse_variant(o.variant);
  } catch (const ValueError& e) {
    throw UsageError(e.what());
  }
  if (o.seed) config.train.seed = *o.seed;
  config.validate();
  const fs::path data(o.data), out(o.out);
  const dataio::Manifest manifest = dataio::load_manifest(data);
  const auto train = load(data, manifest, dataio::Split::kTrain, config.downsample_stride);
  const auto val = load(data, manifest, dataio::Split::kValidation, config.downsample_stride);
  prepare_output(out, o.common.force);
  write_run_config(out / "run_config.ini", config);

  std::cerr << "training " << o.variant << " (seed " << config.train.seed << ") on "
            << train.size() << " train / " << val.size() << " val videos\n";
  const segnet::TrainResult result =
      segnet::train(train, val, config.model, config.train, config.augment, variant, print_epoch);
  Checkpoint ck = result.best.to_checkpoint();
  ck.metadata = model_section(config);
  ck.metadata["variant"] = o.variant;
  ck.metadata["seed"] = std::to_string(config.train.seed);
  ck.metadata["best_epoch"] = std::to_string(result.best_epoch);
  save_checkpoint(out / "checkpoint.bin", ck);
  segnet::write_epoch_log(out / "epoch_log.csv", result.log);
  std::cout << "best epoch " << result.best_epoch << ", checkpoint " << (out / "checkpoint.bin").string()
            << "\n";
  return kOk;
}

int run_eval(const EvalOptions& o) {
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  const auto variant_it = ck.metadata.find("variant");
  if (variant_it == ck.metadata.end()) throw DataError("checkpoint lacks a variant tag");
  const segnet::Variant variant = segnet::parse_variant(variant_it->second);

  RunConfig config = resolve(o.common);
  const bool user_config = o.common.config || !o.common.overrides.empty();
  const auto requested = model_section(config);
  for (const auto& [key, value] : ck.metadata) {
    if (key.rfind("model.", 0) != 0) continue;
    if (user_config && requested.count(key) && requested.at(key) != value) {
      throw DataError("checkpoint/config mismatch on " + key + ": checkpoint has " + value +
                      ", config has " + requested.at(key));
    }
    apply_override(config, key + "=" + value);
  }
  if (auto it = ck.metadata.find("seed"); it != ck.metadata.end()) {
    config.train.seed = std::stoull(it->second);
  }
  config.validate();
  const segnet::ModelParams like =
      segnet::init_params(config.model, segnet::uses_neck(variant), 0);
  const segnet::ModelParams params = segnet::ModelParams::from_checkpoint(ck, like);

  const fs::path data(o.data), out(o.out);
  const dataio::Manifest manifest = dataio::load_manifest(data);
  const auto val = load(data, manifest, dataio::Split::kValidation, config.downsample_stride);
  if (val.empty()) throw DataError("validation split is empty");
  prepare_output(out, o.common.force);

  const segnet::Evaluation ev =
      segnet::evaluate(params, config.model, variant, val, config.train.class_weights);
  const eval::MetricsReport m = eval::compute_metrics(ev.confusion);
  std::ofstream csv(out / "metrics.csv", std::ios::trunc);
  csv << "variant,seed,miou,dice,pixel_accuracy,iou_artery,iou_vein,dice_artery,dice_vein,"
         "val_loss,flops,frames\n";
  char line[512];
  std::snprintf(line, sizeof(line),
                "%s,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%llu,%zu\n",
                segnet::variant_name(variant),
                static_cast<unsigned long long>(config.train.seed), m.miou, m.mean_dice,
                m.pixel_accuracy, m.iou[dataio::kArtery], m.iou[dataio::kVein],
                m.dice[dataio::kArtery], m.dice[dataio::kVein], ev.loss,
                static_cast<unsigned long long>(eval::flops_estimate(config.model, variant)),
                ev.frames);
  csv << line;
  if (!csv) throw DataError("failed writing " + (out / "metrics.csv").string());
  write_run_config(out / "run_config.ini", config);
  std::cout << segnet::variant_name(variant) << ": mIoU " << fmt(m.miou) << ", Dice "
            << fmt(m.mean_dice) << " over " << ev.frames << " frames\n";
  return kOk;
}

int run_ablate(const AblateOptions& o) {
  RunConfig config = resolve(o.common);
  if (o.seeds) {
    try {
      config.seeds = parse_seed_list(*o.seeds);
    } catch (const ConfigError& e) {
      throw UsageError(std::string("--seeds: ") + e.what());
    }
  }
  config.validate();
  const fs::path data(o.data), out(o.out);
  const dataio::Manifest manifest = dataio::load_manifest(data);
  const auto train = load(data, manifest, dataio::Split::kTrain, config.downsample_stride);
  const auto val = load(data, manifest, dataio::Split::kValidation, config.downsample_stride);
  prepare_output(out, o.common.force);
  write_run_config(out / "run_config.ini", config);
  {
    std::ofstream marker(out / kIncompleteMarker, std::ios::trunc);
    marker << "ablation in progress; report.partial.csv holds finished runs\n";
  }
  fs::remove(out / "report.csv");
  fs::remove(out / "report.svg");

  eval::AblationSpec spec;
  spec.seeds = config.seeds;
  std::vector<eval::MetricsReport> done;
  const auto on_run = [&](segnet::Variant v, std::uint64_t seed, const eval::RunRecord& r) {
    const fs::path run_dir = out / "runs" / (std::string(segnet::variant_name(v)) + "_seed" +
                                             std::to_string(seed));
    fs::create_directories(run_dir);
    segnet::write_epoch_log(run_dir / "epoch_log.csv", r.log);
    done.push_back(r.metrics);
    std::ofstream partial(out / "report.partial.csv", std::ios::trunc);
    partial << eval::report_csv(done);
    std::cerr << segnet::variant_name(v) << " seed " << seed << ": mIoU " << fmt(r.metrics.miou)
              << " (best epoch " << r.best_epoch << ")\n";
  };
  std::cerr << "ablation: " << spec.variants.size() << " variants x " << spec.seeds.size()
            << " seeds on " << train.size() << " train / " << val.size() << " val videos\n";
  const auto reports = eval::run_ablation(spec, train, val, config.model, config.train,
                                          config.augment, on_run, print_epoch);
  eval::emit_report(reports, out);
  fs::remove(out / "report.partial.csv");
  fs::remove(out / kIncompleteMarker);
  for (const auto& s : eval::summarize(reports)) {
    std::cout << s.variant << ": mIoU " << fmt(s.miou_mean) << " +- " << fmt(s.miou_std)
              << ", Dice " << fmt(s.dice_mean) << " +- " << fmt(s.dice_std) << ", MACs "
              << s.flops << "\n";
  }
  return kOk;
}

int run_inspect_forces(const InspectOptions& o) {
  const fs::path data(o.data);
  const dataio::Manifest manifest = dataio::load_manifest(data);
  const dataio::ManifestEntry& entry = manifest.find(o.video);
  const dataio::ForceTrace trace = dataio::load_force_csv(data / entry.force_file);
  if (trace.size() != entry.frames) throw AlignmentError(trace.size(), entry.frames);
  const std::vector<double> f = dataio::magnitudes(trace);
  const forcekeys::KeyFrameSelection sel = forcekeys::select_key_frames(f);

  std::cout << "video " << o.video << ": " << f.size() << " frames\n";
  std::cout << "K_min frame " << sel.idx_min << " |fz| " << fmt(sel.f_min) << "\n";
  std::cout << "K_max frame " << sel.idx_max << " |fz| " << fmt(sel.f_max) << "\n";
  std::cout << "frame      |fz|     w_min    w_max  key\n";
  for (std::size_t t = 0; t < f.size(); ++t) {
    const auto w = forcekeys::dynamic_weights(f[t], sel.f_min, sel.f_max);
    char row[128];
    std::snprintf(row, sizeof(row), "%5zu  %8.4f  %8.4f %8.4f  %s\n", t, f[t], w.w_min, w.w_max,
                  t == sel.idx_min ? "min" : t == sel.idx_max ? "max" : "");
    std::cout << row;
  }
  const fs::path svg = o.svg ? fs::path(*o.svg) : fs::path(o.video + "_forces.svg");
  std::ofstream out(svg, std::ios::trunc);
  if (!out) throw DataError("cannot write " + svg.string());
  out << force_plot_svg(o.video, f, sel);
  std::cout << "plot written to " << svg.string() << "\n";
  return kOk;
}

}  // namespace fgseg::cli
