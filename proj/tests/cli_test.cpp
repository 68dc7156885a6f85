// Copyright 2026 The gecprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gecprobe_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    run_ = (dir_ / "run").string();
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(const std::string& args) const {
    const std::string cmd = std::string(GECPROBE_CLI) + " " + args + " > " + (dir_ / "out.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string Slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }

  std::string Output() const { return Slurp(dir_ / "out.txt"); }

  // A tiny end-to-end run: corpus, both bundles, one short training.
  void TinyPipeline() {
    ASSERT_EQ(Run("gen --run " + run_ + " --count 600 --seed 4"), 0) << Output();
    ASSERT_EQ(Run("split --run " + run_ + " --train 300 --dev 40 --test 60 --seed 4"), 0) << Output();
    ASSERT_EQ(Run("train --run " + run_ + " --bundle known --epochs 1 --model-dim 16 --ff-dim 32 --heads 2"), 0)
        << Output();
    ASSERT_EQ(Run("correct --run " + run_ + " --bundle known --beam 2"), 0) << Output();
    ASSERT_EQ(Run("score --run " + run_ + " --bundle known"), 0) << Output();
  }

  fs::path dir_;
  std::string run_;
};

TEST_F(Cli, UnknownErrorTypeIsValidationErrorAndWritesNothing) {
  EXPECT_EQ(Run("gen --run " + run_ + " --etype VERB:TENSE"), 2);
  EXPECT_NE(Output().find("gen"), std::string::npos);
  EXPECT_FALSE(fs::exists(run_));
}

TEST_F(Cli, MissingInputsNameStageAndPath) {
  EXPECT_EQ(Run("train --run " + run_ + " --bundle known"), 2);
  EXPECT_NE(Output().find("train"), std::string::npos);
  EXPECT_NE(Output().find(run_ + "/splits/known"), std::string::npos);
}

TEST_F(Cli, InvalidModelConfigIsRejectedBeforeTraining) {
  ASSERT_EQ(Run("gen --run " + run_ + " --count 200"), 0);
  ASSERT_EQ(Run("split --run " + run_ + " --setting known --train 100 --dev 10 --test 20"), 0) << Output();
  EXPECT_EQ(Run("train --run " + run_ + " --model-dim 30 --heads 4"), 2);
  EXPECT_FALSE(fs::exists(fs::path(run_) / "model"));
}

TEST_F(Cli, InfeasibleSplitExitsThreeAndWritesNoBundle) {
  ASSERT_EQ(Run("gen --run " + run_ + " --count 200"), 0);
  EXPECT_EQ(Run("split --run " + run_ + " --train 5000 --dev 10 --test 10"), 3);
  EXPECT_FALSE(fs::exists(fs::path(run_) / "splits"));
}

TEST_F(Cli, ConfigFileOverridesFlags) {
  const fs::path cfg = dir_ / "cfg.json";
  std::ofstream(cfg) << R"({"count": 50, "etype": "WO"})";
  ASSERT_EQ(Run("gen --run " + run_ + " --count 300 --config " + cfg.string()), 0) << Output();
  const auto manifest = nlohmann::json::parse(Slurp(fs::path(run_) / "corpus" / "manifest.json"));
  EXPECT_EQ(manifest["count"], 50);
  EXPECT_EQ(manifest["error_type"], "WO");
  std::ofstream(cfg) << R"({"cuont": 50})";
  EXPECT_EQ(Run("gen --run " + run_ + " --config " + cfg.string()), 2);
  EXPECT_NE(Output().find("cuont"), std::string::npos);
}

TEST_F(Cli, PipelineWritesLayoutAndStagesReproduce) {
  TinyPipeline();
  const fs::path run(run_);
  for (const char* f : {"corpus/corpus.jsonl", "splits/known/train.jsonl", "splits/unknown/test.jsonl",
                        "model/known/best.bin", "model/known/best.json", "model/known/final.bin",
                        "model/known/train_log.jsonl", "hyps/known.txt", "reports/known.json",
                        "reports/known_length.tsv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(run / f)) << f;
  }
  const auto manifest = nlohmann::json::parse(Slurp(run / "manifest.json"));
  for (const char* stage : {"gen", "split:both", "train:known", "correct:known", "score:known"}) {
    EXPECT_TRUE(manifest["stages"].contains(stage)) << stage;
  }
  EXPECT_EQ(manifest["stages"]["gen"]["outputs"]["corpus/corpus.jsonl"].get<std::string>().size(), 64u);

  // Deleting a downstream artifact and re-running its stage reproduces it.
  const std::string corpus = Slurp(run / "corpus/corpus.jsonl");
  const std::string model = Slurp(run / "model/known/best.bin");
  const std::string hyps = Slurp(run / "hyps/known.txt");
  const std::string report = Slurp(run / "reports/known.json");
  fs::remove(run / "corpus/corpus.jsonl");
  ASSERT_EQ(Run("gen --run " + run_ + " --count 600 --seed 4"), 0);
  EXPECT_EQ(Slurp(run / "corpus/corpus.jsonl"), corpus);
  fs::remove_all(run / "model");
  ASSERT_EQ(Run("train --run " + run_ + " --bundle known --epochs 1 --model-dim 16 --ff-dim 32 --heads 2"), 0);
  EXPECT_EQ(Slurp(run / "model/known/best.bin"), model);
  fs::remove(run / "hyps/known.txt");
  ASSERT_EQ(Run("correct --run " + run_ + " --bundle known --beam 2"), 0);
  EXPECT_EQ(Slurp(run / "hyps/known.txt"), hyps);
  fs::remove(run / "reports/known.json");
  ASSERT_EQ(Run("score --run " + run_ + " --bundle known"), 0);
  EXPECT_EQ(Slurp(run / "reports/known.json"), report);
}

TEST_F(Cli, GapTableAppearsOnceBothSettingsAreScored) {
  TinyPipeline();
  EXPECT_FALSE(fs::exists(fs::path(run_) / "reports/gap.txt"));
  ASSERT_EQ(Run("train --run " + run_ + " --bundle unknown --epochs 1 --model-dim 16 --ff-dim 32 --heads 2"), 0);
  ASSERT_EQ(Run("correct --run " + run_ + " --bundle unknown --beam 2"), 0);
  ASSERT_EQ(Run("score --run " + run_ + " --bundle unknown"), 0);
  const std::string gap = Slurp(fs::path(run_) / "reports/gap.txt");
  EXPECT_NE(gap.find("Known"), std::string::npos);
  EXPECT_NE(gap.find("Delta"), std::string::npos);
  ASSERT_EQ(Run("report --run " + run_), 0);
  EXPECT_NE(Output().find("VERB:SVA unknown: detection"), std::string::npos);
}

TEST_F(Cli, FewShotWithTooFewDonorsIsInfeasible) {
  ASSERT_EQ(Run("gen --run " + run_ + " --count 600 --seed 4"), 0);
  ASSERT_EQ(Run("split --run " + run_ + " --setting unknown --train 300 --dev 40 --test 30 --seed 4"
                " --held-out \"touches => touch\""),
            0)
      << Output();
  EXPECT_EQ(Run("fewshot --run " + run_ + " --bundle unknown --pattern \"touches => touch\" --k 0,500"
                " --donor-count 100 --epochs 1"),
            3)
      << Output();
  EXPECT_FALSE(fs::exists(fs::path(run_) / "reports"));
}

TEST_F(Cli, MissingSubcommandIsUsageError) {
  EXPECT_EQ(Run(""), 2);
  EXPECT_EQ(Run("gen"), 2);
}

}  // namespace
