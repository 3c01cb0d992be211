#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "myopic/classifier.hpp"
#include "myopic/rng.hpp"
#include "myopic/world.hpp"

namespace myopic {

// All scores are in nats and computed exactly from the agent's likelihood
// table and its (symbol-driven) posterior map. Replay agents have no theory
// and raise kTheoryUnavailable.

// sum_x p(x|p) * ln[(post(p|x)/prior(p)) / (post(q|x)/prior(q))].
double discriminative_score(const Agent& agent, ClassIndex p, ClassIndex q);
double discriminative_score(const World& world, const AgentScope& scope, ClassIndex p,
                            ClassIndex q);

// Same log ratio averaged under p(x|truth), for truth outside the scope.
double confusion_score(const Agent& agent, ClassIndex truth, ClassIndex p, ClassIndex q);
double confusion_score(const World& world, const AgentScope& scope, ClassIndex truth,
                       ClassIndex p, ClassIndex q);

// Monte Carlo variant of discriminative_score: p(x|p) is replaced by the
// empirical frequency of `samples` draws. Approximate by construction.
double empirical_score(const Agent& agent, ClassIndex p, ClassIndex q, std::size_t samples,
                       Rng& rng);

// Agent ids (ascending) holding both classes with D_i(p, q) > 0.
std::vector<std::size_t> source_set(std::span<const Agent> agents, ClassIndex p, ClassIndex q);

// Agent ids not holding `truth` that hold `target` and have some other
// in-scope class c with confusion score D_i^truth(c, target) > 0.
std::vector<std::size_t> support_set(std::span<const Agent> agents, ClassIndex truth,
                                     ClassIndex target);

struct IdentifiabilityCheck {
  bool identifiable = true;
  // Unordered pairs (p < q) with S(p, q) or S(q, p) empty.
  std::vector<std::pair<ClassIndex, ClassIndex>> uncovered;
};

IdentifiabilityCheck check_global_identifiability(std::span<const Agent> agents,
                                                  std::size_t class_count);

struct RejectionRate {
  double rate;
  std::size_t agent;
};

// Best network rejection rate for a false class and the agent attaining it
// (lowest id on ties). Throws kNoRejector when no source or support exists.
RejectionRate best_rejection_rate(std::span<const Agent> agents, ClassIndex truth,
                                  ClassIndex target);

struct ScoreEntry {
  std::size_t agent;
  ClassIndex p;
  ClassIndex q;
  double score;
};

struct ScoreReport {
  ClassIndex truth;
  std::vector<ScoreEntry> discriminative;
  std::vector<ScoreEntry> confusion;  // only agents with truth out of scope
  std::vector<std::pair<std::pair<ClassIndex, ClassIndex>, std::vector<std::size_t>>> source_sets;
  std::vector<std::pair<ClassIndex, std::vector<std::size_t>>> support_sets;
  std::vector<std::pair<ClassIndex, std::optional<RejectionRate>>> best_rate;
  IdentifiabilityCheck identifiability;
};

ScoreReport score_report(std::span<const Agent> agents, std::size_t class_count,
                         ClassIndex truth);

nlohmann::json to_json(const ScoreReport& report, const ClassSet& classes,
                       std::span<const Agent> agents);
std::string format_table(const ScoreReport& report, const ClassSet& classes,
                         std::span<const Agent> agents);

// Agents whose classifiers are exact Bayes oracles over the world table.
std::vector<Agent> bayes_agents(const World& world, std::span<const AgentScope> scopes);

}  // namespace myopic
