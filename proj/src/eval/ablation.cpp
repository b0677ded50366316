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

#include "fgseg/eval/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fgseg/error.hpp"

namespace fgseg::eval {

namespace {

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace

std::uint64_t conv_macs(std::uint64_t c_in, std::uint64_t c_out, std::uint64_t kernel,
                        std::uint64_t h_out, std::uint64_t w_out) {
  return c_in * c_out * kernel * kernel * h_out * w_out;
}

std::uint64_t flops_estimate(const segnet::UNetConfig& config, segnet::Variant variant) {
  return segnet::forward_macs(config, segnet::uses_neck(variant));
}

std::vector<MetricsReport> run_ablation(const AblationSpec& spec,
                                        const std::vector<dataio::Video>& train_videos,
                                        const std::vector<dataio::Video>& val_videos,
                                        const segnet::UNetConfig& model,
                                        const segnet::TrainConfig& train,
                                        const dataio::AugmentConfig& augment,
                                        const RunCallback& on_run,
                                        const segnet::EpochCallback& on_epoch) {
  if (spec.variants.empty() || spec.seeds.empty()) {
    throw ValueError("ablation needs at least one variant and one seed");
  }
  std::vector<MetricsReport> reports;
  for (std::uint64_t seed : spec.seeds) {
    for (segnet::Variant variant : spec.variants) {
      segnet::TrainConfig cfg = train;
      cfg.seed = seed;
      segnet::TrainResult result =
          segnet::train(train_videos, val_videos, model, cfg, augment, variant, on_epoch);
      const segnet::Evaluation ev =
          segnet::evaluate(result.best, model, variant, val_videos, cfg.class_weights);
      MetricsReport m = compute_metrics(ev.confusion);
      m.flops = flops_estimate(model, variant);
      m.samples = ev.frames;
      m.model_id = segnet::variant_name(variant);
      m.seed = seed;
      reports.push_back(m);
      if (on_run) {
        RunRecord record{m, std::move(result.log), result.best_epoch, std::move(result.best)};
        on_run(variant, seed, record);
      }
    }
  }
  return reports;
}

std::vector<VariantSummary> summarize(const std::vector<MetricsReport>& reports) {
  std::vector<VariantSummary> out;
  std::map<std::string, std::vector<const MetricsReport*>> groups;
  for (const auto& r : reports) {
    if (groups[r.model_id].empty()) out.push_back({r.model_id});
    groups[r.model_id].push_back(&r);
  }
  for (auto& s : out) {
    const auto& g = groups[s.variant];
    s.runs = g.size();
    s.flops = g.front()->flops;
    for (const auto* r : g) {
      s.miou_mean += r->miou;
      s.dice_mean += r->mean_dice;
    }
    s.miou_mean /= static_cast<double>(s.runs);
    s.dice_mean /= static_cast<double>(s.runs);
    if (s.runs > 1) {
      double vi = 0.0, vd = 0.0;
      for (const auto* r : g) {
        vi += (r->miou - s.miou_mean) * (r->miou - s.miou_mean);
        vd += (r->mean_dice - s.dice_mean) * (r->mean_dice - s.dice_mean);
      }
      s.miou_std = std::sqrt(vi / static_cast<double>(s.runs - 1));
      s.dice_std = std::sqrt(vd / static_cast<double>(s.runs - 1));
    }
  }
  return out;
}

std::string report_csv(const std::vector<MetricsReport>& reports) {
  std::string out = "variant,seed,miou,dice,flops\n";
  for (const auto& r : reports) {
    out += r.model_id + "," + std::to_string(r.seed) + "," + exact(r.miou) + "," +
           exact(r.mean_dice) + "," + std::to_string(r.flops) + "\n";
  }
  return out;
}

std::string report_svg(const std::vector<MetricsReport>& reports) {
  const auto summary = summarize(reports);
  constexpr double kLeft = 60, kTop = 30, kPlotH = 240, kBarW = 60, kGap = 40;
  const double plot_w = static_cast<double>(summary.size()) * (kBarW + kGap) + kGap;
  const double width = kLeft + plot_w + 20, height = kTop + kPlotH + 70;
  auto y_of = [&](double v) { return kTop + kPlotH * (1.0 - v); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\""
    << fixed(height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<text x=\"" << fixed(kLeft, 0) << "\" y=\"18\" font-size=\"14\">Validation mIoU per "
    << "variant (mean +- std over seeds)</text>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0, y = y_of(v);
    s << "<line x1=\"" << fixed(kLeft, 1) << "\" y1=\"" << fixed(y, 1) << "\" x2=\""
      << fixed(kLeft + plot_w, 1) << "\" y2=\"" << fixed(y, 1) << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << fixed(kLeft - 8, 1) << "\" y=\"" << fixed(y + 4, 1)
      << "\" text-anchor=\"end\">" << fixed(v, 1) << "</text>\n";
  }
  s << "<line x1=\"" << fixed(kLeft, 1) << "\" y1=\"" << fixed(kTop, 1) << "\" x2=\""
    << fixed(kLeft, 1) << "\" y2=\"" << fixed(kTop + kPlotH, 1) << "\" stroke=\"#000\"/>\n";
  for (std::size_t i = 0; i < summary.size(); ++i) {
    const auto& v = summary[i];
    const double x = kLeft + kGap + static_cast<double>(i) * (kBarW + kGap);
    const double top = y_of(std::clamp(v.miou_mean, 0.0, 1.0));
    s << "<rect x=\"" << fixed(x, 1) << "\" y=\"" << fixed(top, 1) << "\" width=\""
      << fixed(kBarW, 1) << "\" height=\"" << fixed(kTop + kPlotH - top, 1)
      << "\" fill=\"#4a78b5\"/>\n";
    const double cx = x + kBarW / 2;
    const double lo = y_of(std::clamp(v.miou_mean - v.miou_std, 0.0, 1.0));
    const double hi = y_of(std::clamp(v.miou_mean + v.miou_std, 0.0, 1.0));
    s << "<line x1=\"" << fixed(cx, 1) << "\" y1=\"" << fixed(lo, 1) << "\" x2=\"" << fixed(cx, 1)
      << "\" y2=\"" << fixed(hi, 1) << "\" stroke=\"#000\"/>\n";
    s << "<text x=\"" << fixed(cx, 1) << "\" y=\"" << fixed(top - 6, 1)
      << "\" text-anchor=\"middle\">" << fixed(v.miou_mean, 3) << "</text>\n";
    s << "<text x=\"" << fixed(cx, 1) << "\" y=\"" << fixed(kTop + kPlotH + 18, 1)
      << "\" text-anchor=\"middle\">" << escape_xml(v.variant) << "</text>\n";
  }
  s << "<text x=\"" << fixed(kLeft, 0) << "\" y=\"" << fixed(height - 12, 0)
    << "\">mIoU axis spans [0, 1]</text>\n";
  s << "</svg>\n";
  return s.str();
}

void emit_report(const std::vector<MetricsReport>& reports, const std::filesystem::path& dir) {
  if (reports.empty()) throw ValueError("cannot emit an empty report");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "report.csv", report_csv(reports));
  write_file(dir / "report.svg", report_svg(reports));
}

std::vector<MetricsReport> read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "variant,seed,miou,dice,flops") {
    throw ParseError("unexpected report header", 1);
  }
  std::vector<MetricsReport> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    std::istringstream s(line);
    std::string f[5];
    for (auto& field : f) {
      if (!std::getline(s, field, ',')) throw ParseError("expected 5 fields", row);
    }
    MetricsReport r;
    try {
      r.model_id = f[0];
      r.seed = std::stoull(f[1]);
      r.miou = std::stod(f[2]);
      r.mean_dice = std::stod(f[3]);
      r.flops = std::stoull(f[4]);
    } catch (const std::exception&) {
      throw ParseError("malformed report field", row);
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace fgseg::eval
