#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "motsmine/io.hpp"

namespace fs = std::filesystem;

namespace motsmine {
namespace {

struct CliResult {
  int status = -1;
  std::string out;
};

CliResult run(const std::string& args) {
  const std::string cmd = std::string(MOTSMINE_CLI_PATH) + " " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("motsmine-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }
  fs::path dir_;
};

TEST_F(Cli, SiouPrintsFullPrecision) {
  const CliResult r = run("siou 0 0 2 2 1 1 3 3");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(std::stod(r.out), 1.0 / 7.0);
  EXPECT_EQ(std::stod(run("siou 0 0 2 2 4 4 6 6").out), -1.0 / 3.0);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("").status, 1);
  EXPECT_EQ(run("siou 1 2 3").status, 1);
  EXPECT_EQ(run("link --detections " + p("missing.jsonl") + " --output " + p("o.jsonl")).status, 2);
  write("bad.jsonl", R"({"frame": 0, "class": "car", "mask": {"size": [2, 2], "counts": [1]}})");
  EXPECT_EQ(run("link --detections " + p("bad.jsonl") + " --output " + p("o.jsonl")).status, 1);
  write("cfg.json", R"({"bogus": 1})");
  write("ok.jsonl", "");
  EXPECT_EQ(run("link --config " + p("cfg.json") + " --detections " + p("ok.jsonl") + " --output " + p("o.jsonl")).status, 1);
  EXPECT_EQ(run("link --terms color --detections " + p("ok.jsonl") + " --output " + p("o.jsonl")).status, 1);
  EXPECT_EQ(run("link --detections " + p("ok.jsonl") + " --output " + p("o.jsonl")).status, 0);
  EXPECT_EQ(run("eval --gt " + p("ok.jsonl") + " --pred " + p("ok.jsonl")).status, 1);
}

TEST_F(Cli, SynthMineEvalPipeline) {
  write("synth.json", R"({"num_objects": 4, "num_frames": 10, "height": 60, "width": 80})");
  ASSERT_EQ(run("synth --config " + p("synth.json") + " --seed 3 --out-dir " + p("seq")).status, 0);
  ASSERT_TRUE(fs::exists(dir_ / "seq" / "flows" / "000009.mfl"));
  ASSERT_EQ(run("mine --detections " + p("seq/detections.jsonl") + " --flow-dir " + p("seq/flows") +
                " --output " + p("mined.jsonl"))
                .status,
            0);
  const CliResult e = run("eval --gt " + p("seq/detections.jsonl") + " --pred " + p("seq/detections.jsonl") +
                    " --tracks " + p("mined.jsonl") + " --output " + p("report.json") + " --stdout");
  ASSERT_EQ(e.status, 0);
  const MetricsReport r = load_report(dir_ / "report.json");
  EXPECT_EQ(r.aggregate.scores->soft_accuracy, 1.0);
  EXPECT_EQ(e.out, format_report(r));
}

TEST_F(Cli, ParallelJobsMatchSerial) {
  for (int s = 0; s < 3; ++s) {
    ASSERT_EQ(run("synth --seed " + std::to_string(s) + " --out-dir " + p("s" + std::to_string(s))).status, 0);
  }
  auto link = [&](const std::string& tag, int jobs) {
    std::string args = "link --jobs " + std::to_string(jobs);
    for (int s = 0; s < 3; ++s) args += " --detections " + p("s" + std::to_string(s) + "/detections.jsonl");
    for (int s = 0; s < 3; ++s) args += " --output " + p(tag + std::to_string(s) + ".jsonl");
    return run(args).status;
  };
  ASSERT_EQ(link("serial", 1), 0);
  ASSERT_EQ(link("parallel", 3), 0);
  for (int s = 0; s < 3; ++s) {
    EXPECT_EQ(read_file(dir_ / ("serial" + std::to_string(s) + ".jsonl")),
              read_file(dir_ / ("parallel" + std::to_string(s) + ".jsonl")));
  }
}

}  // namespace
}  // namespace motsmine
