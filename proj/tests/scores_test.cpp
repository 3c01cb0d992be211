#include <gtest/gtest.h>

#include <cmath>

#include "myopic/scores.hpp"
#include "support/fixtures.hpp"

namespace myopic {
namespace {

using testing::error_code_of;
using testing::kT0;
using testing::kT1;
using testing::kT2;

TEST(ScoresTest, W3HandComputedValues) {
  const auto agents = testing::w3_agents();
  EXPECT_NEAR(discriminative_score(agents[0], kT0, kT1), 0.6 * std::log(4.0), 1e-12);
  EXPECT_NEAR(discriminative_score(agents[0], kT0, kT1), 0.8317766166719343, 1e-9);
  EXPECT_NEAR(confusion_score(agents[1], kT0, kT2, kT1), 0.8 * std::log(2.5) + 0.2 * std::log(0.625), 1e-12);
  EXPECT_NEAR(discriminative_score(agents[2], kT0, kT2), 0.8 * std::log(1.6) + 0.2 * std::log(0.4), 1e-12);
}

TEST(ScoresTest, MatchesBruteForceOnRandomWorlds) {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 2 + rng.uniform_index(4);
    const std::size_t symbols = 2 + rng.uniform_index(5);
    const auto rows = testing::random_rows(rng, m, symbols, 0.01);
    const World world = testing::make_world(rows, 0);
    const std::size_t size = 2 + rng.uniform_index(m - 1);
    const AgentScope scope(0, testing::random_subset(rng, m, size), m,
                           testing::random_prior(rng, size));
    for (ClassIndex p : scope.classes()) {
      for (ClassIndex q : scope.classes()) {
        if (p == q) continue;
        EXPECT_NEAR(discriminative_score(world, scope, p, q),
                    testing::brute_score(rows, scope.classes(), scope.prior(), p, p, q), 1e-12);
        for (ClassIndex t = 0; t < m; ++t) {
          if (scope.contains(t)) continue;
          EXPECT_NEAR(confusion_score(world, scope, t, p, q),
                      testing::brute_score(rows, scope.classes(), scope.prior(), t, p, q), 1e-12);
        }
      }
    }
  }
}

TEST(ScoresTest, ConfusionScoreIsExactlyAntisymmetric) {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 3 + rng.uniform_index(3);
    const World world = testing::make_world(testing::random_rows(rng, m, 4, 0.01), 0);
    const AgentScope scope(0, testing::random_subset(rng, m, 2 + rng.uniform_index(m - 2)), m);
    for (ClassIndex t = 0; t < m; ++t) {
      if (scope.contains(t)) continue;
      for (ClassIndex p : scope.classes()) {
        for (ClassIndex q : scope.classes()) {
          EXPECT_EQ(confusion_score(world, scope, t, p, q), -confusion_score(world, scope, t, q, p));
        }
      }
    }
  }
}

TEST(ScoresTest, DiscriminativeScoreIsNonNegativeAndZeroForIdenticalRows) {
  Rng rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 2 + rng.uniform_index(3);
    auto rows = testing::random_rows(rng, m, 3, 0.01);
    rows[1] = rows[0];
    const World world = testing::make_world(rows, 0);
    const AgentScope scope(0, testing::random_subset(rng, m, m), m, testing::random_prior(rng, m));
    for (ClassIndex p = 0; p < m; ++p) {
      for (ClassIndex q = 0; q < m; ++q) {
        if (p != q) EXPECT_GE(discriminative_score(world, scope, p, q), -1e-15);
      }
    }
    EXPECT_NEAR(discriminative_score(world, scope, 0, 1), 0.0, 1e-15);
  }
}

TEST(ScoresTest, ArgumentErrors) {
  const auto agents = testing::w3_agents();
  EXPECT_EQ(error_code_of([&] { discriminative_score(agents[0], kT0, kT2); }),
            ErrorCode::kClassOutOfScope);
  EXPECT_EQ(error_code_of([&] { confusion_score(agents[0], kT0, kT0, kT1); }),
            ErrorCode::kTrueClassInScope);
  const Agent replay{"R", AgentScope(0, {0, 1}, 3), ReplaySource("r.csv", {})};
  EXPECT_EQ(error_code_of([&] { discriminative_score(replay, kT0, kT1); }),
            ErrorCode::kTheoryUnavailable);
}

TEST(ScoresTest, NoisyAgentScoresUseNoisyPosterior) {
  const World w = testing::w3_world();
  const Agent noisy{"N", AgentScope(0, {0, 1}, 3), NoisyOracle(BayesOracle(w.likelihoods), 0.5)};
  const double a = std::log(0.65 / 0.35);
  EXPECT_NEAR(discriminative_score(noisy, kT0, kT1), 0.8 * a - 0.2 * a, 1e-12);
}

TEST(ScoresTest, SourceAndSupportSets) {
  const auto agents = testing::w3_agents();
  EXPECT_EQ(source_set(agents, kT0, kT1), (std::vector<std::size_t>{0}));
  EXPECT_EQ(source_set(agents, kT1, kT0), (std::vector<std::size_t>{0}));
  EXPECT_EQ(source_set(agents, kT0, kT2), (std::vector<std::size_t>{2}));
  EXPECT_EQ(source_set(agents, kT1, kT2), (std::vector<std::size_t>{1}));
  EXPECT_EQ(support_set(agents, kT0, kT1), (std::vector<std::size_t>{1}));
  EXPECT_TRUE(support_set(agents, kT0, kT2).empty());
}

TEST(ScoresTest, GlobalIdentifiability) {
  const auto full = testing::w3_agents(true);
  EXPECT_TRUE(check_global_identifiability(full, 3).identifiable);
  const auto partial = testing::w3_agents(false);
  const auto check = check_global_identifiability(partial, 3);
  EXPECT_FALSE(check.identifiable);
  ASSERT_EQ(check.uncovered.size(), 1u);
  EXPECT_EQ(check.uncovered[0], std::make_pair(kT0, kT2));
}

TEST(ScoresTest, BestRejectionRate) {
  const auto agents = testing::w3_agents();
  const auto r1 = best_rejection_rate(agents, kT0, kT1);
  EXPECT_NEAR(r1.rate, 0.6 * std::log(4.0), 1e-12);
  EXPECT_EQ(r1.agent, 0u);
  const auto r2 = best_rejection_rate(agents, kT0, kT2);
  EXPECT_NEAR(r2.rate, 0.8 * std::log(1.6) + 0.2 * std::log(0.4), 1e-12);
  EXPECT_EQ(r2.agent, 2u);
  const auto partial = testing::w3_agents(false);
  EXPECT_EQ(error_code_of([&] { best_rejection_rate(partial, kT0, kT2); }), ErrorCode::kNoRejector);
}

TEST(ScoresTest, BestRateTiesGoToLowestId) {
  const World w = testing::w3_world();
  std::vector<Agent> agents;
  for (std::size_t i = 0; i < 3; ++i) {
    agents.push_back(Agent{"A" + std::to_string(i), AgentScope(i, {0, 1}, 3), BayesOracle(w.likelihoods)});
  }
  EXPECT_EQ(best_rejection_rate(agents, kT0, kT1).agent, 0u);
}

TEST(ScoresTest, BestRateDominatesEverySourceScore) {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const auto config = testing::random_identifiable_experiment(rng, 0.0, 1);
    for (ClassIndex k = 0; k < config.classes.size(); ++k) {
      if (k == config.true_class) continue;
      const double best = best_rejection_rate(config.agents, config.true_class, k).rate;
      for (std::size_t i : source_set(config.agents, config.true_class, k)) {
        EXPECT_GE(best, discriminative_score(config.agents[i], config.true_class, k));
      }
    }
  }
}

TEST(ScoresTest, EmpiricalScoreApproachesExactScore) {
  const auto agents = testing::w3_agents();
  Rng rng(11);
  const double exact = discriminative_score(agents[0], kT0, kT1);
  EXPECT_NEAR(empirical_score(agents[0], kT0, kT1, 200000, rng), exact, 0.01);
}

TEST(ScoresTest, ReportJsonAndTable) {
  const auto agents = testing::w3_agents();
  const World w = testing::w3_world();
  const auto report = score_report(agents, 3, kT0);
  EXPECT_TRUE(report.identifiability.identifiable);
  const auto json = to_json(report, w.classes, agents);
  EXPECT_EQ(json.at("true_class"), "theta0");
  EXPECT_TRUE(json.at("identifiable").get<bool>());
  EXPECT_EQ(json.at("agents").size(), 3u);
  for (const char* key : {"discriminative", "confusion", "source_sets", "support_sets", "best_rate",
                          "uncovered_pairs"}) {
    EXPECT_TRUE(json.contains(key)) << key;
  }
  const std::string table = format_table(report, w.classes, agents);
  EXPECT_NE(table.find("theta1"), std::string::npos);
  EXPECT_NE(table.find("0.8317"), std::string::npos);
}

}  // namespace
}  // namespace myopic
