#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "myopic/cli.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string config(const std::string& name) {
  return std::string(std::getenv("MYOPIC_CONFIG_DIR")) + "/" + name;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("myopic_cli_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = myopic::cli::run(args, out, err);
    return {code, out.str(), err.str()};
  }
  std::string out_dir() const { return dir_.string(); }
  nlohmann::json read_json(const std::string& name) const {
    std::ifstream in(dir_ / name);
    return nlohmann::json::parse(in);
  }

  fs::path dir_;
};

TEST_F(CliTest, ScoresIdentifiable) {
  const auto r = run({"scores", "--config", config("w3.json"), "--out", out_dir()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("theta1"), std::string::npos);
  EXPECT_TRUE(read_json("scores.json").at("identifiable").get<bool>());
}

TEST_F(CliTest, ScoresNotIdentifiable) {
  const auto r = run({"scores", "--config", config("w3_no_c.json"), "--out", out_dir()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(read_json("scores.json").at("uncovered_pairs").size(), 1u);
}

TEST_F(CliTest, MissingConfigFails) {
  const auto r = run({"scores", "--config", "/nonexistent.json", "--out", out_dir()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  EXPECT_EQ(run({"scores"}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, DisconnectedGraphRejected) {
  EXPECT_EQ(run({"validate", "--config", config("w3_disconnected.json")}).code, 1);
  const auto ok = run({"validate", "--config", config("w3.json")});
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("globally identifiable: yes"), std::string::npos);
}

TEST_F(CliTest, RunWritesOutputs) {
  const auto r = run({"run", "--config", config("w3.json"), "--out", out_dir(), "--horizon", "40"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "trajectories.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "summary.json"));
  const auto manifest = read_json("manifest.json");
  EXPECT_EQ(manifest.at("config").at("horizon"), 40);
  const auto sweep = run({"run", "--config", config("w3.json"), "--out", out_dir(), "--horizon",
                          "10", "--seeds", "2"});
  EXPECT_EQ(sweep.code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "seed_7" / "summary.json"));
  EXPECT_TRUE(fs::exists(dir_ / "seed_8" / "summary.json"));
}

TEST_F(CliTest, RunFromManifestIsByteIdentical) {
  ASSERT_EQ(run({"run", "--config", config("er9.json"), "--out", out_dir(), "--horizon", "50"}).code, 0);
  const auto a = dir_ / "trajectories.csv";
  std::ifstream first(a);
  const std::string before(std::istreambuf_iterator<char>(first), {});
  const auto second_dir = dir_ / "again";
  ASSERT_EQ(run({"run", "--config", (dir_ / "manifest.json").string(), "--out", second_dir.string()}).code, 0);
  std::ifstream second(second_dir / "trajectories.csv");
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(second), {}), before);
}

TEST_F(CliTest, RatesPass) {
  const auto r = run({"rates", "--config", config("w3.json"), "--out", out_dir(), "--horizon",
                      "2000"});
  EXPECT_EQ(r.code, 0) << r.out;
  const auto report = read_json("rates.json");
  EXPECT_EQ(report.at("checked"), 120);
  EXPECT_GE(report.at("pass_fraction").get<double>(), 0.95);
}

TEST_F(CliTest, RatesBoundViolatedOnShortHorizon) {
  const auto r = run({"rates", "--config", config("w3.json"), "--out", out_dir(), "--horizon",
                      "30"});
  EXPECT_EQ(r.code, 4) << r.out;
}

TEST_F(CliTest, RatesInsufficientData) {
  const auto r = run({"rates", "--config", config("w3.json"), "--out", out_dir(), "--horizon",
                      "12", "--seeds", "1"});
  EXPECT_EQ(r.code, 3);
}

TEST_F(CliTest, CompareReportsAllRules) {
  const auto r = run({"compare", "--config", config("w3.json"), "--out", out_dir(), "--seeds", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto report = read_json("compare.json");
  EXPECT_EQ(report.at("rules").size(), 3u);
  EXPECT_EQ(report.at("seeds").size(), 3u);
}

TEST_F(CliTest, BinaryRuns) {
  const std::string cmd = std::string(MYOPIC_CLI_PATH) + " validate --config " + config("w3.json") +
                          " > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
}

}  // namespace
