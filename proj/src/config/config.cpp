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

#include "fgseg/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "fgseg/error.hpp"

namespace fgseg {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) out.push_back(trim(item));
  if (!text.empty() && text.back() == ',') out.push_back("");
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

// --- value codecs ----------------------------------------------------------

std::string format(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}
std::string format(std::size_t v) { return std::to_string(v); }
std::string format(bool v) { return v ? "true" : "false"; }
std::string format(const phantom::Range& r) { return format(r.lo) + ", " + format(r.hi); }
std::string format(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format(v[i]);
  return out;
}
std::string format(const std::vector<std::uint64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}
std::string format(fgneck::AttentionAxis a) { return fgneck::axis_name(a); }

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    bad_value(key, text, "a number");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    bad_value(key, text, "a non-negative integer");
  }
  return v;
}

void parse(const std::string& key, const std::string& t, double& out) {
  out = parse_double(key, t);
}
void parse(const std::string& key, const std::string& t, std::size_t& out) {
  out = static_cast<std::size_t>(parse_unsigned(key, t));
}
void parse(const std::string& key, const std::string& t, bool& out) {
  if (t == "true" || t == "1") {
    out = true;
  } else if (t == "false" || t == "0") {
    out = false;
  } else {
    bad_value(key, t, "a boolean");
  }
}
void parse(const std::string& key, const std::string& t, phantom::Range& out) {
  const auto items = split_list(t);
  if (items.size() != 2) bad_value(key, t, "'lo, hi'");
  out = {parse_double(key, items[0]), parse_double(key, items[1])};
}
void parse(const std::string& key, const std::string& t, std::vector<double>& out) {
  out.clear();
  for (const auto& item : split_list(t)) out.push_back(parse_double(key, item));
  if (out.empty()) bad_value(key, t, "a comma-separated list of numbers");
}
void parse(const std::string& key, const std::string& t, std::vector<std::uint64_t>& out) {
  out.clear();
  for (const auto& item : split_list(t)) out.push_back(parse_unsigned(key, item));
  if (out.empty()) bad_value(key, t, "a comma-separated list of integers");
}
void parse(const std::string& key, const std::string& t, fgneck::AttentionAxis& out) {
  try {
    out = fgneck::parse_axis(t);
  } catch (const ValueError&) {
    bad_value(key, t, "'memory' or 'current'");
  }
}

// One entry per key, in output order.
template <typename Visitor>
void visit(RunConfig& c, Visitor&& v) {
  v("data", "downsample_stride", c.downsample_stride);
  v("data", "augment", c.augment.enabled);
  v("data", "flip_probability", c.augment.flip_probability);
  v("data", "max_rotation_deg", c.augment.max_rotation_deg);
  v("data", "max_translation", c.augment.max_translation);
  v("data", "min_gain", c.augment.min_gain);
  v("data", "max_gain", c.augment.max_gain);
  v("data", "max_offset", c.augment.max_offset);
  v("data", "max_bias_coefficient", c.augment.max_bias_coefficient);
  v("data", "max_noise_sigma", c.augment.max_noise_sigma);

  auto& p = c.phantom;
  v("phantom", "sequences", c.phantom_sequences);
  v("phantom", "seed", c.phantom_seed);
  v("phantom", "image_size", p.image_size);
  v("phantom", "frames", p.frames);
  v("phantom", "validation_fraction", p.validation_fraction);
  v("phantom", "peak_force", p.peak_force);
  v("phantom", "force_jitter", p.force_jitter);
  v("phantom", "vein_compliance", p.vein_compliance);
  v("phantom", "artery_compliance", p.artery_compliance);
  v("phantom", "collapse_fraction", p.collapse_fraction);
  v("phantom", "background_level", p.background_level);
  v("phantom", "background_ramp", p.background_ramp);
  v("phantom", "vessel_level", p.vessel_level);
  v("phantom", "speckle", p.speckle);
  v("phantom", "artery_radius", p.artery_radius);
  v("phantom", "vein_semi_axis", p.vein_semi_axis);
  v("phantom", "center_y", p.center_y);
  v("phantom", "left_slot_x", p.left_slot_x);
  v("phantom", "right_slot_x", p.right_slot_x);

  auto& m = c.model;
  v("model", "image_size", m.image_size);
  v("model", "in_channels", m.in_channels);
  v("model", "base_channels", m.base_channels);
  v("model", "depth", m.depth);
  v("model", "num_classes", m.num_classes);
  v("model", "convs_per_stage", m.convs_per_stage);
  v("model", "key_channels", m.key_channels);
  v("model", "value_channels", m.value_channels);
  v("model", "attention_axis", m.attention_axis);

  auto& t = c.train;
  v("train", "seed", t.seed);
  v("train", "learning_rate", t.learning_rate);
  v("train", "batch_size", t.batch_size);
  v("train", "max_epochs", t.max_epochs);
  v("train", "samples_per_epoch", t.samples_per_epoch);
  v("train", "class_weights", t.class_weights);
  v("train", "rho", t.rmsprop.rho);
  v("train", "epsilon", t.rmsprop.epsilon);
  v("train", "momentum", t.rmsprop.momentum);
  v("train", "weight_decay", t.rmsprop.weight_decay);
  v("train", "plateau_patience", t.plateau.patience);
  v("train", "plateau_factor", t.plateau.factor);
  v("train", "plateau_min_delta", t.plateau.min_delta);
  v("train", "min_lr", t.plateau.min_lr);

  v("eval", "seeds", c.seeds);
}

void set_value(RunConfig& config, const std::string& section, const std::string& key,
               const std::string& value) {
  bool found = false;
  visit(config, [&](const char* s, const char* k, auto& field) {
    if (section == s && key == k) {
      parse(section + "." + key, trim(value), field);
      found = true;
    }
  });
  if (!found) throw ConfigError("unknown config key '" + section + "." + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  phantom.validate();
  model.validate();
  train.validate(model.num_classes);
  if (downsample_stride < 1) throw ValueError("data.downsample_stride must be >= 1");
  if (seeds.empty()) throw ValueError("eval.seeds must list at least one seed");
  if (augment.min_gain > augment.max_gain) throw ValueError("data.min_gain exceeds max_gain");
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& file,
                          const std::vector<std::string>& overrides) {
  RunConfig config;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw DataError("cannot open config file: " + file->string());
    pt::ptree tree;
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError("config file " + file->string() + ": " + e.message() + " (line " +
                        std::to_string(e.line()) + ")");
    }
    for (const auto& [section, body] : tree) {
      if (body.empty()) {
        throw ConfigError("config key '" + section + "' must live inside a [section]");
      }
      for (const auto& [key, value] : body) set_value(config, section, key, value.data());
    }
  }
  for (const auto& o : overrides) apply_override(config, o);
  return config;
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  }
  set_value(config, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
            assignment.substr(eq + 1));
}

std::string to_ini(const RunConfig& config) {
  RunConfig copy = config;
  std::string out, current;
  visit(copy, [&](const char* section, const char* key, auto& field) {
    if (current != section) {
      out += (current.empty() ? "[" : "\n[") + std::string(section) + "]\n";
      current = section;
    }
    out += std::string(key) + " = " + format(field) + "\n";
  });
  return out;
}

void write_run_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write config: " + path.string());
  out << to_ini(config);
  if (!out) throw DataError("failed writing config: " + path.string());
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  parse("seeds", text, out);
  return out;
}

}  // namespace fgseg
