#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "myopic/config.hpp"
#include "support/fixtures.hpp"

namespace myopic {
namespace {

using nlohmann::json;
using testing::error_code_of;

std::string config_dir() { return std::getenv("MYOPIC_CONFIG_DIR"); }

std::string trajectories_of(const ExperimentConfig& c) {
  std::ostringstream out;
  write_trajectories(run_experiment(c), out);
  return out.str();
}

TEST(ConfigTest, LoadsW3) {
  const auto loaded = load_config(config_dir() + "/w3.json");
  const auto& c = loaded.experiment;
  EXPECT_EQ(c.classes.size(), 3u);
  EXPECT_EQ(c.agents.size(), 3u);
  EXPECT_EQ(c.agents[1].name, "B");
  EXPECT_EQ(c.graph.edges(), path_graph(3).edges());
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(trajectories_of(c), trajectories_of(testing::w3_experiment(AggregationRule::kMin, 500, 7)));
}

TEST(ConfigTest, OverridesWin) {
  Overrides ov;
  ov.seed = 3;
  ov.horizon = 12;
  ov.rule = AggregationRule::kMax;
  ov.local_only = true;
  ov.out_dir = "/tmp/somewhere";
  const auto loaded = load_config(config_dir() + "/w3.json", ov);
  EXPECT_EQ(loaded.experiment.seed, 3u);
  EXPECT_EQ(loaded.experiment.horizon, 12u);
  EXPECT_EQ(loaded.experiment.rule, AggregationRule::kMax);
  EXPECT_TRUE(loaded.experiment.local_only);
  EXPECT_EQ(loaded.output.dir, "/tmp/somewhere");
}

TEST(ConfigTest, ErdosRenyiGraphFollowsSeed) {
  const auto a = load_config(config_dir() + "/er9.json");
  const auto b = load_config(config_dir() + "/er9.json");
  EXPECT_EQ(a.experiment.graph.edges(), b.experiment.graph.edges());
  EXPECT_TRUE(is_connected(a.experiment.graph));
  EXPECT_EQ(a.experiment.agents.size(), 9u);
}

TEST(ConfigTest, RejectsBadDocuments) {
  const json base = json::parse(R"({
    "world": {"classes": ["p", "q"], "inputs": ["a", "b"],
              "likelihoods": [[0.9, 0.1], [0.1, 0.9]], "true_class": "p"},
    "agents": [{"classes": ["p", "q"]}]
  })");
  EXPECT_NO_THROW(parse_config(base, "."));
  auto bad = base;
  bad["horizn"] = 3;
  EXPECT_EQ(error_code_of([&] { parse_config(bad, "."); }), ErrorCode::kConfigError);
  bad = base;
  bad["agents"][0]["classes"] = {"p", "r"};
  EXPECT_EQ(error_code_of([&] { parse_config(bad, "."); }), ErrorCode::kUnknownClass);
  bad = base;
  bad["rule"] = "median";
  EXPECT_EQ(error_code_of([&] { parse_config(bad, "."); }), ErrorCode::kInvalidArgument);
  bad = base;
  bad["world"]["likelihoods"][0] = {0.9, 0.2};
  EXPECT_EQ(error_code_of([&] { parse_config(bad, "."); }), ErrorCode::kRowNotStochastic);
  bad = base;
  bad["agents"][0]["source"] = {{"kind", "oracle"}};
  EXPECT_EQ(error_code_of([&] { parse_config(bad, "."); }), ErrorCode::kConfigError);
  bad = base;
  bad["horizon"] = "long";
  EXPECT_EQ(error_code_of([&] { parse_config(bad, "."); }), ErrorCode::kConfigError);
  EXPECT_EQ(error_code_of([] { load_config(config_dir() + "/w3_disconnected.json"); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(error_code_of([] { load_config("/nonexistent.json"); }), ErrorCode::kIoError);
}

TEST(ConfigTest, PerAgentLikelihoodOverride) {
  const json doc = json::parse(R"({
    "world": {"classes": ["p", "q"], "inputs": ["a", "b"],
              "likelihoods": [[0.9, 0.1], [0.1, 0.9]], "true_class": "p"},
    "agents": [{"classes": ["p", "q"], "likelihoods": [[0.6, 0.4], [0.4, 0.6]]}]
  })");
  const auto c = parse_config(doc, ".").experiment;
  EXPECT_NEAR(discriminative_score(c.agents[0], 0, 1), 0.2 * std::log(1.5), 1e-12);
}

TEST(ConfigTest, ResolvedConfigReproducesExperiment) {
  const auto loaded = load_config(config_dir() + "/er9.json", Overrides{.horizon = 60});
  const json resolved = resolved_config(loaded);
  const auto again = parse_config(resolved, "/");
  EXPECT_EQ(again.experiment.graph.edges(), loaded.experiment.graph.edges());
  EXPECT_EQ(trajectories_of(again.experiment), trajectories_of(loaded.experiment));
  EXPECT_EQ(resolved_config(again).dump(), resolved.dump());
  const json manifest{{"manifest_version", 1}, {"config", resolved}};
  EXPECT_EQ(trajectories_of(parse_config(manifest, "/").experiment),
            trajectories_of(loaded.experiment));
}

TEST(ConfigTest, ReplayOnlyConfig) {
  const auto dir = std::filesystem::temp_directory_path() / "myopic_config_replay";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "a.csv") << "round,agent_id,p,q\n1,0,0.7,0.3\n2,0,0.6,0.4\n";
  std::ofstream(dir / "cfg.json") << R"({
    "classes": ["p", "q"], "true_class": "p",
    "agents": [{"classes": ["p", "q"], "source": {"kind": "replay", "path": "a.csv"}}],
    "horizon": 2
  })";
  const auto c = load_config((dir / "cfg.json").string()).experiment;
  EXPECT_FALSE(c.world.has_value());
  const auto log = run_experiment(c);
  EXPECT_EQ(log.horizon(), 2u);
  auto longer = c;
  longer.horizon = 3;
  EXPECT_EQ(error_code_of([&] { run_experiment(longer); }), ErrorCode::kReplayExhausted);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace myopic
