#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "llmcc/run_io.hpp"

using namespace llmcc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("llmcc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ::unsetenv("LLMCC_CONFIG");
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string(LLMCC_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_text_file(out), read_text_file(err)};
  }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  // Short overloaded trace plus one unbounded run.
  void make_unbounded(const std::string& run_dir) const {
    ASSERT_EQ(run("gen-trace --recipe custom --schedule 60:0-3,60:3,60:3-0 --seed 3 --out " + p("t.csv")).code, 0);
    ASSERT_EQ(run("run --trace " + p("t.csv") + " --mode unbounded --out " + p(run_dir)).code, 0);
  }

  void write_tbt_column(const std::string& run_dir, const std::vector<int>& values) const {
    std::string csv = std::string(kPerSecondHeader) + "\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
      csv += std::to_string(i) + ",1,0,,," + std::to_string(values[i]) + ",,0,0,1\n";
    }
    fs::create_directories(dir_ / run_dir);
    write_text_file(dir_ / run_dir / "per_second.csv", csv);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_NE(run("").code, 0);
  EXPECT_NE(run("no-such-command").code, 0);
  EXPECT_NE(run("gen-trace --recipe paper").code, 0);
  EXPECT_NE(run("gen-trace --recipe poem --out " + p("x.csv")).code, 0);
  EXPECT_EQ(run("gen-trace --recipe custom --out " + p("x.csv")).code, 1);
  EXPECT_EQ(run("sweep --rps 1..2 --step 0").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, GenTracePaperRecipe) {
  Outcome o = run("gen-trace --recipe paper --seed 7 --out " + p("paper.csv"));
  ASSERT_EQ(o.code, 0) << o.err;
  Trace t = read_trace(p("paper.csv"));
  EXPECT_EQ(t.duration_ms, 1'320'000);
  EXPECT_EQ(t.metadata.seed, 7u);
}

TEST_F(Cli, GenTraceCustomSchedule) {
  ASSERT_EQ(run("gen-trace --recipe custom --schedule 60:0-2.5,90:2.5 --out " + p("c.csv")).code, 0);
  Trace t = read_trace(p("c.csv"));
  EXPECT_EQ(t.duration_ms, 150'000);
  EXPECT_EQ(t.metadata.schedule, "60:0-2.5,90:2.5");
}

TEST_F(Cli, BoundedWithoutThresholdsNamesKeys) {
  ASSERT_EQ(run("gen-trace --recipe custom --schedule 10:1 --out " + p("t.csv")).code, 0);
  Outcome o = run("run --trace " + p("t.csv") + " --mode bounded --out " + p("b"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("controller.t1_ms"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("controller.t2_ms"), std::string::npos) << o.err;
}

TEST_F(Cli, CalibrateFromTbtColumn) {
  write_tbt_column("u", {10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110});
  Outcome o = run("calibrate --unbounded-run " + p("u"));
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("t1_ms: 60\n"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("t2_ms: 90\n"), std::string::npos) << o.out;
  RunConfig cfg = load_config(dir_ / "u" / "calibrated_config.json");
  EXPECT_EQ(cfg.controller.t1_ms, 60.0);
  EXPECT_EQ(cfg.controller.t2_ms, 90.0);
}

TEST_F(Cli, CalibrateDegenerateAndMissing) {
  write_tbt_column("flat", {40, 40, 40, 40, 40, 40});
  EXPECT_EQ(run("calibrate --unbounded-run " + p("flat")).code, 3);
  write_tbt_column("short", {40, 50});
  EXPECT_EQ(run("calibrate --unbounded-run " + p("short")).code, 3);
  Outcome o = run("calibrate --unbounded-run " + p("missing"));
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find(p("missing")), std::string::npos) << o.err;
}

TEST_F(Cli, RunIsDeterministic) {
  make_unbounded("u1");
  ASSERT_EQ(run("run --trace " + p("t.csv") + " --mode unbounded --out " + p("u2")).code, 0);
  for (auto name : {"per_second.csv", "summary.txt", "effective_config", "requests.csv", "trace.csv"}) {
    EXPECT_EQ(read_text_file(dir_ / "u1" / name), read_text_file(dir_ / "u2" / name)) << name;
  }
}

TEST_F(Cli, FullPipelineAndSelfCompare) {
  make_unbounded("u");
  Outcome cal = run("calibrate --unbounded-run " + p("u") + " --out " + p("th.json"));
  ASSERT_EQ(cal.code, 0) << cal.err;
  Outcome b = run("run --trace " + p("t.csv") + " --mode bounded --config " + p("th.json") + " --out " + p("b"));
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_TRUE(fs::exists(dir_ / "b" / "controller_log.csv"));
  EXPECT_NE(read_text_file(dir_ / "b" / "effective_config").find("\"t1_ms\""), std::string::npos);

  Outcome self = run("compare --unbounded " + p("u") + " --bounded " + p("u") + " --window 10:150");
  ASSERT_EQ(self.code, 0) << self.err;
  EXPECT_NE(self.out.find("completions_delta_pct: 0.00\n"), std::string::npos) << self.out;
  EXPECT_NE(self.out.find("energy_delta_pct: 0.00\n"), std::string::npos) << self.out;
  EXPECT_NE(self.out.find("e2e_peak_ratio: 1.000\n"), std::string::npos) << self.out;

  Outcome pair = run("compare --unbounded " + p("u") + " --bounded " + p("b") + " --window auto --out " + p("cmp"));
  ASSERT_EQ(pair.code, 0) << pair.err;
  EXPECT_TRUE(fs::exists(dir_ / "cmp" / "comparison.txt"));
  EXPECT_TRUE(fs::exists(dir_ / "cmp" / "side_by_side.csv"));

  Outcome beyond = run("compare --unbounded " + p("u") + " --bounded " + p("b") + " --window 5000:6000");
  EXPECT_EQ(beyond.code, 1);
}

TEST_F(Cli, CompareRejectsDifferentSeeds) {
  make_unbounded("u");
  ASSERT_EQ(run("run --trace " + p("t.csv") + " --mode unbounded --seed 99 --out " + p("v")).code, 0);
  EXPECT_EQ(run("compare --unbounded " + p("u") + " --bounded " + p("v") + " --window 10:100").code, 1);
}

TEST_F(Cli, ConfigOverridesAndUnknownKeys) {
  ASSERT_EQ(run("gen-trace --recipe custom --schedule 10:1 --out " + p("t.csv")).code, 0);
  EXPECT_EQ(run("run --trace " + p("t.csv") + " --out " + p("r") + " --set server.nope=1").code, 1);
  ASSERT_EQ(run("run --trace " + p("t.csv") + " --out " + p("r") + " --set server.max_batch=12").code, 0);
  EXPECT_EQ(load_config(dir_ / "r" / "effective_config").server.max_batch, 12);
  EXPECT_EQ(run("run --trace " + p("nope.csv") + " --out " + p("r2")).code, 2);
}

TEST_F(Cli, SweepSinglePoint) {
  Outcome o = run("sweep --rps 1.2 --duration 60 --out " + p("sweep.csv"));
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string table = read_text_file(dir_ / "sweep.csv");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 2);
  EXPECT_EQ(table, o.out);
}
