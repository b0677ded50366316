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

// Drives the fgseg executable end to end and checks outputs and exit codes.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "test_util.hpp"

namespace fgseg {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(FGSEG_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Small model and short schedule so each training run takes well under a second.
constexpr const char* kTiny =
    " --set model.base_channels=8 --set model.depth=2 --set train.max_epochs=1"
    " --set train.samples_per_epoch=8";

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli");
    const Result r = run("gen-phantom --out " + data().string() + " --sequences 8 --seed 3");
    ASSERT_EQ(r.code, 0) << r.output;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static fs::path data() { return dir_->path() / "data"; }
  static fs::path path(const std::string& name) { return dir_->path() / name; }

  static testing::TempDir* dir_;
};

testing::TempDir* Cli::dir_ = nullptr;

TEST_F(Cli, VersionAndHelp) {
  EXPECT_EQ(run("--version").code, 0);
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
}

TEST_F(Cli, GenPhantomWritesManifestAndIsReproducible) {
  std::size_t dirs = 0;
  for (const auto& e : fs::directory_iterator(data())) dirs += e.is_directory();
  EXPECT_EQ(dirs, 8u);
  const std::string manifest = slurp(data() / "manifest.txt");
  for (int i = 0; i < 8; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "seq_%04d", i);
    EXPECT_NE(manifest.find(id), std::string::npos) << id;
  }
  EXPECT_TRUE(fs::exists(data() / "run_config.ini"));

  const fs::path again = path("again");
  ASSERT_EQ(run("gen-phantom --out " + again.string() + " --sequences 8 --seed 3").code, 0);
  for (const auto& e : fs::recursive_directory_iterator(data())) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), data());
    EXPECT_EQ(slurp(e.path()), slurp(again / rel)) << rel;
  }
}

TEST_F(Cli, GenPhantomUsageErrors) {
  EXPECT_EQ(run("gen-phantom --out " + path("zero").string() + " --sequences 0").code, 1);
  // Refuses to overwrite without --force.
  EXPECT_EQ(run("gen-phantom --out " + data().string() + " --sequences 8 --seed 3").code, 1);
  EXPECT_EQ(run("gen-phantom --out " + path("bad").string() + " --set phantom.nope=1").code, 1);
}

TEST_F(Cli, InspectForces) {
  const fs::path svg = path("forces.svg");
  const Result r =
      run("inspect-forces --data " + data().string() + " --video seq_0000 --svg " + svg.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("K_min frame"), std::string::npos);
  EXPECT_NE(r.output.find("K_max frame"), std::string::npos);
  EXPECT_TRUE(fs::exists(svg));

  // Every table row: weights sum to one.
  std::istringstream in(r.output);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::size_t t;
    double f, wmin, wmax;
    if (!(fields >> t >> f >> wmin >> wmax)) continue;
    EXPECT_NEAR(wmin + wmax, 1.0, 1e-4) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 12);

  EXPECT_EQ(run("inspect-forces --data " + data().string() + " --video seq_9999").code, 2);
  EXPECT_EQ(run("inspect-forces --data " + path("nowhere").string() + " --video seq_0000").code,
            2);
}

TEST_F(Cli, TrainEvalRoundTrip) {
  const fs::path run_dir = path("train_fg");
  const Result t = run("train --data " + data().string() + " --variant fg_full --seed 2 --out " +
                       run_dir.string() + kTiny);
  ASSERT_EQ(t.code, 0) << t.output;
  for (const char* f : {"checkpoint.bin", "epoch_log.csv", "run_config.ini"}) {
    EXPECT_TRUE(fs::exists(run_dir / f)) << f;
  }
  EXPECT_EQ(slurp(run_dir / "epoch_log.csv").rfind("epoch,train_loss,val_loss,miou,dice,lr", 0),
            0u);

  const fs::path ev1 = path("eval1"), ev2 = path("eval2");
  const std::string ck = (run_dir / "checkpoint.bin").string();
  ASSERT_EQ(run("eval --checkpoint " + ck + " --data " + data().string() + " --out " +
                ev1.string()).code, 0);
  ASSERT_EQ(run("eval --checkpoint " + ck + " --data " + data().string() + " --out " +
                ev2.string()).code, 0);
  const std::string metrics = slurp(ev1 / "metrics.csv");
  EXPECT_EQ(metrics.rfind("variant,seed,miou,dice,", 0), 0u);
  EXPECT_NE(metrics.find("fg_full,2,"), std::string::npos);
  EXPECT_EQ(metrics, slurp(ev2 / "metrics.csv"));

  // Overwrite policy and config/checkpoint consistency.
  EXPECT_EQ(run("train --data " + data().string() + " --variant fg_full --out " +
                run_dir.string() + kTiny).code, 1);
  EXPECT_EQ(run("eval --checkpoint " + ck + " --data " + data().string() + " --out " +
                path("eval3").string() + " --set model.base_channels=16").code, 2);
  EXPECT_EQ(run("eval --checkpoint " + path("missing.bin").string() + " --data " +
                data().string() + " --out " + path("eval4").string()).code, 2);
}

TEST_F(Cli, TrainRejectsBadInput) {
  const Result bad = run("train --data " + data().string() + " --variant unet --out " +
                         path("bad_variant").string());
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.output.find("fg_wo_kfs_fbw"), std::string::npos) << bad.output;
  EXPECT_EQ(run("train --data " + path("nowhere").string() + " --variant baseline --out " +
                path("no_data").string()).code, 2);
  EXPECT_EQ(run("train --data " + data().string() + " --variant baseline --out " +
                path("bad_lr").string() + " --set train.learning_rate=-1").code, 1);
}

TEST_F(Cli, AblateWritesOneReport) {
  const fs::path out = path("ablate");
  const Result r = run("ablate --data " + data().string() + " --seeds 1,2 --out " +
                       out.string() + kTiny);
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string csv = slurp(out / "report.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 8);
  EXPECT_TRUE(fs::exists(out / "report.svg"));
  EXPECT_FALSE(fs::exists(out / "INCOMPLETE"));
  EXPECT_FALSE(fs::exists(out / "report.partial.csv"));
  std::size_t runs = 0;
  for (const auto& e : fs::directory_iterator(out / "runs")) runs += e.is_directory();
  EXPECT_EQ(runs, 8u);

  EXPECT_EQ(run("ablate --data " + data().string() + " --seeds 1,,3 --out " +
                path("ablate_bad").string()).code, 1);
}

}  // namespace
}  // namespace fgseg
