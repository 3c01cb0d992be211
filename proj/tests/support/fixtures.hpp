#pragma once

// Shared test fixtures and independent oracles. Nothing here calls into the
// score or dynamics implementations it is used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <optional>
#include <vector>

#include <functional>

#include "myopic/classifier.hpp"
#include "myopic/error.hpp"
#include "myopic/network.hpp"
#include "myopic/rng.hpp"
#include "myopic/scores.hpp"
#include "myopic/sim.hpp"
#include "myopic/world.hpp"

namespace myopic::testing {

// Runs fn and returns the code of the Error it throws.
inline std::optional<ErrorCode> error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline constexpr ClassIndex kT0 = 0;
inline constexpr ClassIndex kT1 = 1;
inline constexpr ClassIndex kT2 = 2;

// Three classes over X = {a, b}; rows (0.8, 0.2), (0.2, 0.8), (0.5, 0.5).
inline World w3_world() {
  return build_world(ClassSet({"theta0", "theta1", "theta2"}), InputSpace({"a", "b"}),
                     LikelihoodTable({{0.8, 0.2}, {0.2, 0.8}, {0.5, 0.5}}), "theta0");
}

// A: {theta0, theta1}, B: {theta1, theta2}, C: {theta0, theta2}, uniform priors.
inline std::vector<AgentScope> w3_scopes(bool include_c = true) {
  std::vector<AgentScope> scopes{AgentScope(0, {kT0, kT1}, 3), AgentScope(1, {kT1, kT2}, 3)};
  if (include_c) scopes.emplace_back(2, std::vector<ClassIndex>{kT0, kT2}, 3);
  return scopes;
}

inline std::vector<Agent> w3_agents(bool include_c = true) {
  const World world = w3_world();
  const auto scopes = w3_scopes(include_c);
  std::vector<Agent> agents;
  const char* names[] = {"A", "B", "C"};
  for (const auto& s : scopes) agents.push_back(Agent{names[s.agent_id()], s, BayesOracle(world.likelihoods)});
  return agents;
}

// W3 agents on the path A - B - C.
inline ExperimentConfig w3_experiment(AggregationRule rule, std::size_t horizon,
                                      std::uint64_t seed) {
  World world = w3_world();
  return ExperimentConfig{
      .classes = world.classes,
      .true_class = world.true_class,
      .world = world,
      .agents = w3_agents(),
      .graph = path_graph(3),
      .rule = rule,
      .horizon = horizon,
      .observation_mode = ObservationMode::kIndependent,
      .seed = seed,
  };
}

// ---------------------------------------------------------------------------
// Brute-force score oracle: the textbook double loop, posterior recomputed
// from scratch for every (x, class) and the ratio of ratios logged directly.

inline double brute_posterior(const std::vector<std::vector<double>>& rows,
                              const std::vector<ClassIndex>& scope,
                              const std::vector<double>& prior, std::size_t position,
                              std::size_t x) {
  double evidence = 0.0;
  for (std::size_t j = 0; j < scope.size(); ++j) evidence += rows[scope[j]][x] * prior[j];
  return rows[scope[position]][x] * prior[position] / evidence;
}

inline double brute_score(const std::vector<std::vector<double>>& rows,
                          const std::vector<ClassIndex>& scope, const std::vector<double>& prior,
                          ClassIndex weight_class, ClassIndex p, ClassIndex q) {
  const auto jp = static_cast<std::size_t>(std::find(scope.begin(), scope.end(), p) - scope.begin());
  const auto jq = static_cast<std::size_t>(std::find(scope.begin(), scope.end(), q) - scope.begin());
  double total = 0.0;
  for (std::size_t x = 0; x < rows[weight_class].size(); ++x) {
    const double ratio = (brute_posterior(rows, scope, prior, jp, x) / prior[jp]) /
                         (brute_posterior(rows, scope, prior, jq, x) / prior[jq]);
    total += rows[weight_class][x] * std::log(ratio);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Linear-probability reference dynamics.

inline std::vector<double> linear_local_update(const std::vector<double>& pi,
                                               const std::vector<double>& post,
                                               const AgentScope& scope) {
  std::vector<double> hat(pi.size(), 0.0);
  double fill = 0.0;
  for (std::size_t j = 0; j < scope.size(); ++j) {
    const ClassIndex k = scope.classes()[j];
    hat[k] = post[j] / scope.prior()[j] * pi[k];
    fill = std::max(fill, hat[k]);
  }
  for (ClassIndex k = 0; k < pi.size(); ++k) {
    if (!scope.contains(k)) hat[k] = fill;
  }
  const double total = std::accumulate(hat.begin(), hat.end(), 0.0);
  for (double& h : hat) h /= total;
  return hat;
}

inline std::vector<double> linear_aggregate(AggregationRule rule, const std::vector<double>& pi,
                                            const std::vector<std::vector<double>>& mus) {
  std::vector<double> out(pi.size());
  for (std::size_t k = 0; k < pi.size(); ++k) {
    double v = pi[k];
    for (const auto& mu : mus) {
      if (rule == AggregationRule::kMin) v = std::min(v, mu[k]);
      if (rule == AggregationRule::kMax) v = std::max(v, mu[k]);
      if (rule == AggregationRule::kAvg) v += mu[k];
    }
    if (rule == AggregationRule::kAvg) v /= static_cast<double>(mus.size() + 1);
    out[k] = v;
  }
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& v : out) v /= total;
  return out;
}

// ---------------------------------------------------------------------------
// Random worlds.

inline std::vector<std::vector<double>> random_rows(Rng& rng, std::size_t m, std::size_t symbols,
                                                    double min_weight) {
  std::vector<std::vector<double>> rows(m, std::vector<double>(symbols));
  for (auto& row : rows) {
    double total = 0.0;
    for (double& v : row) {
      v = min_weight + rng.uniform();
      total += v;
    }
    for (double& v : row) v /= total;
  }
  return rows;
}

inline std::vector<ClassIndex> random_subset(Rng& rng, std::size_t m, std::size_t size) {
  std::vector<ClassIndex> all(m);
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    std::swap(all[k], all[k + rng.uniform_index(m - k)]);
  }
  all.resize(size);
  std::sort(all.begin(), all.end());
  return all;
}

inline std::vector<double> random_prior(Rng& rng, std::size_t size) {
  std::vector<double> prior(size);
  double total = 0.0;
  for (double& p : prior) {
    p = 0.2 + rng.uniform();
    total += p;
  }
  for (double& p : prior) p /= total;
  return prior;
}

inline World make_world(std::vector<std::vector<double>> rows, ClassIndex truth) {
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < rows.size(); ++k) labels.push_back("c" + std::to_string(k));
  std::vector<std::string> symbols;
  for (std::size_t x = 0; x < rows.front().size(); ++x) symbols.push_back("x" + std::to_string(x));
  return build_world(ClassSet(labels), InputSpace(symbols), LikelihoodTable(rows),
                     labels[truth]);
}

inline double min_best_rate(std::span<const Agent> agents, std::size_t m, ClassIndex truth) {
  double lowest = std::numeric_limits<double>::infinity();
  for (ClassIndex k = 0; k < m; ++k) {
    if (k != truth) lowest = std::min(lowest, best_rejection_rate(agents, truth, k).rate);
  }
  return lowest;
}

// Globally identifiable world with partially informative agents on a
// connected graph, and every best rejection rate at least `min_rate`.
inline ExperimentConfig random_identifiable_experiment(Rng& rng, double min_rate,
                                                       std::size_t horizon) {
  for (;;) {
    const std::size_t m = 3 + rng.uniform_index(2);
    const std::size_t symbols = 3 + rng.uniform_index(4);
    const std::size_t n = 3 + rng.uniform_index(3);
    const ClassIndex truth = rng.uniform_index(m);
    World world = make_world(random_rows(rng, m, symbols, 0.05), truth);
    std::vector<Agent> agents;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t size = 2 + rng.uniform_index(m - 2);
      AgentScope scope(i, random_subset(rng, m, size), m, random_prior(rng, size));
      agents.push_back(Agent{"agent" + std::to_string(i), scope, BayesOracle(world.likelihoods)});
    }
    if (!check_global_identifiability(agents, m).identifiable) continue;
    if (min_best_rate(agents, m, truth) < min_rate) continue;
    AgentGraph graph = erdos_renyi_connected(n, 0.5, rng);
    return ExperimentConfig{
        .classes = world.classes,
        .true_class = truth,
        .world = world,
        .agents = std::move(agents),
        .graph = std::move(graph),
        .rule = AggregationRule::kMin,
        .horizon = horizon,
        .seed = rng.next_u64(),
    };
  }
}

}  // namespace myopic::testing
