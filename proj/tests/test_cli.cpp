#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "palloc/cli.hpp"
#include "palloc/export.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string output;
};

Result run_cli(const std::string& args) {
  const std::string cmd = std::string(PALLOC_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, "popen failed"};
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("palloc_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out_flag(const std::string& sub) const { return "--out " + (dir_ / sub).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, MissingConfigIsAnError) {
  const auto r = run_cli("run custom " + (dir_ / "missing.cfg").string() + " " + out_flag("o"));
  EXPECT_EQ(r.code, 1) << r.output;
  EXPECT_NE(r.output.find("missing.cfg"), std::string::npos) << r.output;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli("").code, 1);
  EXPECT_EQ(run_cli("run").code, 1);
  EXPECT_EQ(run_cli("run custom").code, 1);
  EXPECT_EQ(run_cli("run inventory --jobs 0").code, 1);
  EXPECT_EQ(run_cli("frobnicate").code, 1);
}

TEST_F(CliTest, InventoryRunPassesAndIsReproducible) {
  const auto a = run_cli("run inventory --seed 4 " + out_flag("a"));
  ASSERT_EQ(a.code, 0) << a.output;
  EXPECT_NE(a.output.find("RESULT inventory: PASS"), std::string::npos);
  const auto b = run_cli("run inventory --seed 4 " + out_flag("b"));
  ASSERT_EQ(b.code, 0) << b.output;
  const std::string csv_a = slurp(dir_ / "a" / "inventory.csv");
  ASSERT_FALSE(csv_a.empty());
  EXPECT_EQ(csv_a, slurp(dir_ / "b" / "inventory.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "inventory.meta"), slurp(dir_ / "b" / "inventory.meta"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "inventory.gp"));
}

TEST_F(CliTest, MetaFileReloadsAsConfig) {
  ASSERT_EQ(run_cli("run inventory --seed 6 " + out_flag("a")).code, 0);
  const auto meta = dir_ / "a" / "inventory.meta";
  const auto r = run_cli("run custom " + meta.string() + " " + out_flag("b"));
  ASSERT_EQ(r.code, 0) << r.output;
  // Same configuration, same name, so the trajectory matches exactly.
  EXPECT_EQ(slurp(dir_ / "a" / "inventory.csv"), slurp(dir_ / "b" / "inventory.csv"));
}

TEST_F(CliTest, ReportOnConstantTrajectory) {
  const auto csv = dir_ / "flat.csv";
  {
    std::ofstream o(csv);
    o << palloc::csv_header(2) << "\n";
    for (int k = 0; k < 5; ++k) o << k << ",1,1,0,0,0,0,0,0,0,0\n";
  }
  const auto r = run_cli("report " + csv.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("all"), std::string::npos);
  const auto rep = palloc::make_report(palloc::parse_csv(slurp(csv)));
  ASSERT_EQ(rep.phases.size(), 1u);
  EXPECT_EQ(rep.phases[0].err_opt_max, 0.0);
  EXPECT_EQ(rep.phases[0].samples, 5u);
  EXPECT_EQ(rep.agents, 2u);
}

TEST_F(CliTest, ReportRejectsTruncatedCsv) {
  const auto csv = dir_ / "cut.csv";
  {
    std::ofstream o(csv);
    o << palloc::csv_header(1) << "\n0,1,0,0,0,0,0\n1,1,0,0";
  }
  const auto r = run_cli("report " + csv.string());
  EXPECT_EQ(r.code, 1) << r.output;
  EXPECT_NE(r.output.find("parse"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("line 3"), std::string::npos) << r.output;
  EXPECT_EQ(run_cli("report " + (dir_ / "none.csv").string()).code, 1);
}

TEST_F(CliTest, ReportSplitsPhasesFromMeta) {
  const auto r = run_cli("run chua_average --horizon 60 " + out_flag("o"));
  ASSERT_NE(r.code, 1) << r.output;
  std::ostringstream out;
  ASSERT_EQ(palloc::cli::report((dir_ / "o" / "chua_average.csv").string(), out), 0);
  const auto rep = palloc::report_file(dir_ / "o" / "chua_average.csv");
  ASSERT_EQ(rep.phases.size(), 3u);
  EXPECT_EQ(rep.phases[0].name, "pre-onset");
  EXPECT_DOUBLE_EQ(rep.phases[1].start, 30.0);
  EXPECT_DOUBLE_EQ(rep.phases[2].start, 45.0);
  EXPECT_GT(rep.phases[1].err_opt_max, 10.0 * rep.phases[2].err_opt_final);
  EXPECT_NE(out.str().find("post-rejection"), std::string::npos);
}

TEST_F(CliTest, ShippedExampleRuns) {
  const auto r = run_cli("run " + std::string(PALLOC_SOURCE_DIR) + "/configs/custom_example.cfg " + out_flag("o"));
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir_ / "o" / "custom_example.csv"));
}

TEST_F(CliTest, ParallelJobsKeepTargetOrder) {
  const auto r = run_cli("run inventory inventory --horizon 20 --jobs 2 " + out_flag("o"));
  EXPECT_NE(r.code, 1) << r.output;
  const auto first = r.output.find("== inventory");
  ASSERT_NE(first, std::string::npos);
  EXPECT_NE(r.output.find("== inventory", first + 1), std::string::npos);
}
