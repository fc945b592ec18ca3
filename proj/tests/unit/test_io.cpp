#include <gtest/gtest.h>

#include <sstream>

#include "optlaws/error.hpp"
#include "optlaws/io.hpp"

using namespace optlaws;

namespace {

std::string message_of(const std::string& csv) {
  std::istringstream in(csv);
  try {
    io::read_runs_csv(in);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

const std::string kHeader = std::string(io::kRunCsvHeader) + "\n";

}  // namespace

TEST(RunCsv, ReadsFixtureCorpus) {
  const auto runs = io::read_runs_csv(std::string(OPTLAWS_FIXTURE_DIR) + "/runs.csv");
  ASSERT_EQ(runs.size(), 66u);
  EXPECT_EQ(runs.front().model, 4.05);
  EXPECT_TRUE(runs.back().diverged);
}

TEST(RunCsv, ErrorsNameTheLine) {
  EXPECT_NE(message_of("model,tokens\n").find("line 1"), std::string::npos);
  EXPECT_NE(message_of(kHeader + "1,10,1e-3,1e-3,1,1,5,2.5,0\n1,10,1e-3\n").find("line 3"),
            std::string::npos);
  EXPECT_NE(message_of(kHeader + "1,10,abc,1e-3,1,1,5,2.5,0\n").find("line 2"),
            std::string::npos);
  EXPECT_NE(message_of(kHeader + "1,10,1e-3,1e-3,1,1,5,2.5,3\n").find("line 2"),
            std::string::npos);
  EXPECT_NE(message_of(kHeader + "1,10,1e-3,1e-3,1,1,5,-2.5,0\n").find("line 2"),
            std::string::npos);
}

TEST(RunCsv, WriteReadRoundTrip) {
  std::vector<RunRecord> runs(2);
  runs[0] = {1.2, 50.0, 1e-3, 5e-4, {1.0, 3.0, 30.0}, 2.345678901234567, false};
  runs[1] = {0.3, 20.0, 9e-3, 9e-3, {0.1, 0.1, 0.1}, kDivergedLoss, true};
  std::ostringstream out;
  io::write_runs_csv(out, runs);
  std::istringstream in(out.str());
  const auto back = io::read_runs_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].loss, runs[0].loss);
  EXPECT_EQ(back[0].markers.a2, 3.0);
  EXPECT_TRUE(back[1].diverged);
}

TEST(LawJson, SaveLoadIsByteIdentical) {
  FittedLaw law = FittedLaw::reference();
  law.residual_rms = 1.25e-3;
  law.rows = 42;
  const std::string once = io::dump(io::to_json(law));
  const std::string twice = io::dump(io::to_json(io::law_from_json(io::to_json(law))));
  EXPECT_EQ(once, twice);
  EXPECT_NE(once.find("\"reference_only\": true"), std::string::npos);
}

TEST(LawJson, RejectsMalformed) {
  auto doc = io::to_json(FittedLaw::reference());
  doc["c"].erase(3);
  EXPECT_THROW(io::law_from_json(doc), DataError);
  auto bad_mode = io::to_json(FittedLaw::reference());
  bad_mode["mode"] = "finetune";
  EXPECT_THROW(io::law_from_json(bad_mode), Error);
}

TEST(ConfigJson, BothForms) {
  const auto a = io::config_from_json(io::json::parse(
      R"({"model": 1.2, "tokens": 50, "eta1": 1, "eta2": 1, "markers": [1, 1, 20], "label": "x"})"));
  EXPECT_EQ(a.label, "x");
  EXPECT_EQ(a.tokens(), 50.0);
  const auto b = io::config_from_json({{"model", 1.2}, {"schedule", io::to_json(a.schedule)}});
  EXPECT_EQ(io::dump(io::to_json(a.schedule)), io::dump(io::to_json(b.schedule)));
  EXPECT_THROW(io::config_from_json(io::json::parse(R"({"tokens": 5})")), DataError);
}

TEST(Json, DumpSortsKeys) {
  const std::string s = io::dump({{"zeta", 1}, {"alpha", 2}});
  EXPECT_LT(s.find("alpha"), s.find("zeta"));
  EXPECT_EQ(s.back(), '\n');
}
