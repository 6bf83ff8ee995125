#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(CARTCREDIT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string run_stderr(const std::string& args) {
  const std::string cmd = std::string(CARTCREDIT_CLI_PATH) + " " + args + " 2>&1 >/dev/null";
  std::string out;
  if (FILE* pipe = popen(cmd.c_str(), "r")) {
    char buf[512];
    while (std::fgets(buf, sizeof(buf), pipe)) out += buf;
    pclose(pipe);
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cartcredit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(run("synth --out " + q(dir_ / "raw") +
                  " --rows 600 --numeric 4 --categorical 2 --modalities 3 --noise 0.05 --seed 9"),
              0);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string q(const fs::path& p) { return "'" + p.string() + "'"; }
  std::string raw_args() const {
    return "--input " + q(dir_ / "raw" / "data.csv") + " --codebook " + q(dir_ / "raw" / "codebook.csv");
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthWritesArtifacts) {
  for (const char* name : {"data.csv", "codebook.csv", "rule.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "raw" / name)) << name;
  }
}

TEST_F(Cli, PipelineProducesEveryArtifact) {
  const fs::path out = dir_ / "run";
  ASSERT_EQ(run("pipeline " + raw_args() + " --out " + q(out)), 0);
  for (const char* name : {"encoded.csv", "schema.csv", "cleaning.log", "wald.csv", "correlation.csv",
                           "screening.json", "model.cart", "tree.dot", "tree.txt", "evaluation.json",
                           "evaluation.txt", "roc.tsv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / name)) << name;
  }
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  ASSERT_EQ(manifest["stages"].size(), 4u);
  for (const auto& stage : manifest["stages"]) EXPECT_EQ(stage["status"], "completed");
  EXPECT_EQ(manifest["config"]["min-node-size"], 5);
}

TEST_F(Cli, PipelineIsDeterministic) {
  ASSERT_EQ(run("pipeline " + raw_args() + " --out " + q(dir_ / "a") + " --holdout 0.25 --seed 4"), 0);
  ASSERT_EQ(run("pipeline " + raw_args() + " --out " + q(dir_ / "b") + " --holdout 0.25 --seed 4"), 0);
  for (const char* name : {"encoded.csv", "wald.csv", "screening.json", "model.cart", "evaluation.json", "roc.tsv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / name), slurp(dir_ / "b" / name)) << name;
  }
}

TEST_F(Cli, StagesComposeLikePipeline) {
  const std::string out = " --out " + q(dir_ / "staged");
  ASSERT_EQ(run("encode " + raw_args() + out), 0);
  ASSERT_EQ(run("screen" + out), 0);
  ASSERT_EQ(run("train" + out), 0);
  ASSERT_EQ(run("eval" + out), 0);
  ASSERT_EQ(run("pipeline " + raw_args() + " --out " + q(dir_ / "whole")), 0);
  for (const char* name : {"encoded.csv", "screening.json", "model.cart", "evaluation.json"}) {
    EXPECT_EQ(slurp(dir_ / "staged" / name), slurp(dir_ / "whole" / name)) << name;
  }
}

TEST_F(Cli, ConfigurationErrorsExitTwo) {
  const std::string out = " --out " + q(dir_ / "e");
  EXPECT_EQ(run("encode --input " + q(dir_ / "raw" / "data.csv") + out), 2);
  EXPECT_EQ(run("encode --input " + q(dir_ / "raw" / "data.csv") + " --codebook " +
                q(dir_ / "nope.csv") + out),
            2);
  EXPECT_EQ(run("encode " + raw_args() + " --outlier-rule median" + out), 2);
  EXPECT_EQ(run("bogus"), 2);
  ASSERT_EQ(run("encode " + raw_args() + out), 0);
  EXPECT_EQ(run("train" + out), 2);  // no screening result yet
  EXPECT_EQ(run("train --all-features --min-node-size 6" + out), 2);
  EXPECT_EQ(run("train --all-features --min-node-size 6 --allow-large-min-node-size" + out), 0);
  EXPECT_EQ(run("eval --score-mode soft" + out), 2);
  EXPECT_EQ(run("screen --alpha 1.5" + out), 2);
}

TEST_F(Cli, SingularFitExitsFour) {
  spit(dir_ / "flat.csv", "a,b,TARGET\n1,5,0\n2,5,1\n3,5,0\n4,5,1\n5,5,1\n6,5,0\n");
  const std::string out = " --out " + q(dir_ / "s");
  ASSERT_EQ(run("encode --skip-codebook --input " + q(dir_ / "flat.csv") + out), 0);
  EXPECT_EQ(run("screen" + out), 4);
}

TEST_F(Cli, DataErrorsExitThree) {
  spit(dir_ / "bad.csv", "a,TARGET\n1,0\n2,7\n3,1\n");
  const std::string out = " --out " + q(dir_ / "d");
  ASSERT_EQ(run("encode --skip-codebook --input " + q(dir_ / "bad.csv") + out), 0);
  EXPECT_EQ(run("screen" + out), 3);
  spit(dir_ / "unknown.csv", slurp(dir_ / "raw" / "data.csv") + "1,1,1,1,c1_level99,c2_level1,1\n");
  EXPECT_EQ(run("encode --input " + q(dir_ / "unknown.csv") + " --codebook " +
                q(dir_ / "raw" / "codebook.csv") + out),
            3);
}

TEST_F(Cli, FailedStageSkipsTheRest) {
  const fs::path out = dir_ / "f";
  EXPECT_EQ(run("pipeline " + raw_args() + " --min-node-size 9 --out " + q(out)), 2);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["stages"][0]["status"], "completed");
  EXPECT_EQ(manifest["stages"][1]["status"], "completed");
  EXPECT_EQ(manifest["stages"][2]["status"], "failed");
  EXPECT_EQ(manifest["stages"][3]["status"], "skipped");
}

TEST_F(Cli, ConfigFileWithOverrides) {
  spit(dir_ / "config.json", R"({"max-depth": 3, "train": {"max-depth": 1}, "unknown-key": true})");
  const std::string out = " --out " + q(dir_ / "c");
  ASSERT_EQ(run("encode " + raw_args() + out), 0);
  ASSERT_EQ(run("train --all-features --config " + q(dir_ / "config.json") + out), 0);
  const std::string model = slurp(dir_ / "c" / "model.cart");
  EXPECT_NE(model.find("max-depth\t1"), std::string::npos);
  ASSERT_EQ(run("train --all-features --max-depth 2 --config " + q(dir_ / "config.json") + out), 0);
  EXPECT_NE(slurp(dir_ / "c" / "model.cart").find("max-depth\t2"), std::string::npos);
  EXPECT_EQ(run("train --config " + q(dir_ / "missing.json") + out), 2);
}

TEST_F(Cli, PredictAppendsColumns) {
  const fs::path out = dir_ / "p";
  ASSERT_EQ(run("pipeline " + raw_args() + " --out " + q(out)), 0);
  // Extra columns pass through untouched.
  std::string encoded = slurp(out / "encoded.csv");
  ASSERT_EQ(run("predict --input " + q(out / "encoded.csv") + " --out " + q(out)), 0);
  const std::string pred = slurp(out / "predictions.csv");
  EXPECT_EQ(pred.substr(0, pred.find('\n')),
            encoded.substr(0, encoded.find('\n')) + ",predicted_class,score");
  EXPECT_EQ(std::count(pred.begin(), pred.end(), '\n'), std::count(encoded.begin(), encoded.end(), '\n'));

  const std::string header = encoded.substr(0, encoded.find('\n'));
  spit(dir_ / "empty.csv", header + "\n");
  ASSERT_EQ(run("predict --input " + q(dir_ / "empty.csv") + " --output " + q(dir_ / "empty_out.csv") +
                " --out " + q(out)),
            0);
  EXPECT_EQ(slurp(dir_ / "empty_out.csv"), header + ",predicted_class,score\n");
}

TEST_F(Cli, PredictWarnsOnUnseenCategory) {
  std::string data = "x,g,TARGET\n";
  for (int i = 0; i < 60; ++i) {
    const char* level = i % 3 == 0 ? "A" : (i % 3 == 1 ? "B" : "C");
    data += std::to_string(i % 7) + "," + level + "," + (i % 3 == 0 ? "1" : "0") + "\n";
  }
  spit(dir_ / "cat.csv", data);
  spit(dir_ / "cat_codes.csv", "feature,label,code\ng,A,1\ng,B,2\ng,C,3\n");
  const fs::path out = dir_ / "u";
  ASSERT_EQ(run("encode --input " + q(dir_ / "cat.csv") + " --codebook " + q(dir_ / "cat_codes.csv") +
                " --out " + q(out)),
            0);
  ASSERT_EQ(run("train --all-features --out " + q(out)), 0);
  spit(dir_ / "new.csv", "x,g\n3,9\n3,1\n");
  const std::string err = run_stderr("predict --input " + q(dir_ / "new.csv") + " --out " + q(out));
  EXPECT_NE(err.find("row 0"), std::string::npos) << err;
  EXPECT_EQ(err.find("row 1"), std::string::npos) << err;
  const std::string pred = slurp(out / "predictions.csv");
  EXPECT_EQ(pred, "x,g,predicted_class,score\n3,9,0,0\n3,1,1,1\n");
}
