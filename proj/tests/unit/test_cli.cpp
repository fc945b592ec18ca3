#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "optlaws/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kFixtures = OPTLAWS_FIXTURE_DIR;

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = optlaws::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("optlaws_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
  }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, FitRecoversFixtureLaw) {
  const Result r = run({"fit", "--runs", kFixtures + "/runs.csv", "--out", path("law.json"),
                        "--report", path("report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = json::parse(slurp(path("report.json")));
  EXPECT_LE(report["residual_rms"].get<double>(), 1e-10);
  EXPECT_EQ(report["rows"].get<int>(), 64);

  const Result p = run({"predict", "--law", path("law.json"), "--config", kFixtures + "/config.json"});
  ASSERT_EQ(p.code, 0) << p.err;
  const json pred = json::parse(p.out);
  EXPECT_EQ(pred["label"], "wsd");
  EXPECT_GT(pred["loss"].get<double>(), 0.0);
  EXPECT_FALSE(pred["reference_only"].get<bool>());
}

TEST_F(Cli, CheckPrintsCriterion) {
  const Result r = run({"check", "--eta-max", "0.4", "--warmup", "8.39", "--model", "4.05",
                        "--tokens", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["verdict"], "stable");
  EXPECT_GT(doc["R"].get<double>(), 0.0);
  EXPECT_LT(doc["R"].get<double>(), 1.0);
}

TEST_F(Cli, RankOrdersAndGates) {
  const Result r = run({"rank", "--law", "reference", "--configs", kFixtures + "/configs.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  const auto& rows = doc["ranking"];
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows.back()["label"], "hot");
  EXPECT_TRUE(doc["reference_only"].get<bool>());
  for (std::size_t i = 1; i + 1 < rows.size(); ++i)
    EXPECT_LE(rows[i - 1]["loss"].get<double>(), rows[i]["loss"].get<double>());
}

TEST_F(Cli, EmptyRankIsUsageError) {
  write("empty.json", "[]");
  const Result r = run({"rank", "--law", "reference", "--configs", path("empty.json")});
  EXPECT_EQ(r.code, optlaws::cli::kExitUsage);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST_F(Cli, UnknownSubcommand) {
  const Result r = run({"bogus"});
  EXPECT_EQ(r.code, optlaws::cli::kExitUsage);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
}

TEST_F(Cli, MalformedCsvNamesLine) {
  std::string csv = slurp(kFixtures + "/runs.csv");
  const auto second_row = csv.find('\n', csv.find('\n') + 1) + 1;
  csv.insert(second_row, "1,2,3\n");
  write("bad.csv", csv);
  const Result r = run({"fit", "--runs", path("bad.csv"), "--out", path("law.json")});
  EXPECT_EQ(r.code, optlaws::cli::kExitUsage);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST_F(Cli, SweepIsReproducible) {
  const std::vector<std::string> args{"sweep", "--law", "reference", "--eta-range", "0.1,1.5,5",
                                      "--warmup-values", "0.5,8", "--model", "4.05",
                                      "--tokens", "100"};
  const Result a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "warmup,eta_max,R,gated,loss");
  EXPECT_NE(a.out.find(",1,7\n"), std::string::npos);
}

TEST_F(Cli, SimulatePassesOnFixture) {
  const Result r = run({"simulate", "--config", kFixtures + "/simulate.json", "--out",
                        path("sim.json"), "--trace", path("trace.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(slurp(path("sim.json")))["passed"].get<bool>());
  EXPECT_EQ(slurp(path("trace.csv")).substr(0, 23), "path,t,x_norm,grad_norm");
}

TEST_F(Cli, SeedFromEnvironment) {
  const std::vector<std::string> args{"validate", "--quick", "--suite", "anti_concentration"};
  ::setenv("OPTLAWS_SEED", "17", 1);
  const Result a = run(args);
  ::unsetenv("OPTLAWS_SEED");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(json::parse(a.out)["suites"]["anti_concentration"]["seed"].get<int>(), 17);
  EXPECT_EQ(json::parse(run(args).out)["suites"]["anti_concentration"]["seed"].get<int>(), 0);
  EXPECT_EQ(json::parse(run({"validate", "--quick", "--suite", "anti_concentration", "--seed", "3"})
                            .out)["suites"]["anti_concentration"]["seed"]
                .get<int>(),
            3);
}
