#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "myopic/world.hpp"

namespace myopic {

// An agent's identifiable classes and the prior its classifier was trained with.
class AgentScope {
 public:
  // Empty prior means uniform. Throws kInvalidScope on an empty or repeated
  // class list, out-of-range indices, or a prior that is not a positive
  // probability vector of matching length.
  AgentScope(std::size_t agent_id, std::vector<ClassIndex> classes, std::size_t total_classes,
             std::vector<double> prior = {});

  std::size_t agent_id() const { return agent_id_; }
  const std::vector<ClassIndex>& classes() const { return classes_; }
  const std::vector<double>& prior() const { return prior_; }
  std::size_t size() const { return classes_.size(); }
  std::size_t total_classes() const { return total_classes_; }
  bool contains(ClassIndex k) const { return position_of(k).has_value(); }
  std::optional<std::size_t> position_of(ClassIndex k) const;
  // Throws kClassOutOfScope.
  std::size_t require_position(ClassIndex k) const;

 private:
  std::size_t agent_id_;
  std::vector<ClassIndex> classes_;
  std::vector<double> prior_;
  std::size_t total_classes_;
  std::vector<std::optional<std::size_t>> position_;
};

// Posterior over an agent's scope, aligned with AgentScope::classes().
struct PosteriorVector {
  std::vector<double> probs;
};

// Exact Bayes posterior from a likelihood table restricted to the scope.
class BayesOracle {
 public:
  explicit BayesOracle(LikelihoodTable likelihoods) : likelihoods_(std::move(likelihoods)) {}

  PosteriorVector operator()(const AgentScope& scope, SymbolIndex x) const;
  const LikelihoodTable& likelihoods() const { return likelihoods_; }

 private:
  LikelihoodTable likelihoods_;
};

// Bayes posterior mixed with the uniform vector: (1 - gamma) p + gamma / |scope|.
class NoisyOracle {
 public:
  NoisyOracle(BayesOracle base, double gamma);

  PosteriorVector operator()(const AgentScope& scope, SymbolIndex x) const;
  const LikelihoodTable& likelihoods() const { return base_.likelihoods(); }
  double gamma() const { return gamma_; }

 private:
  BayesOracle base_;
  double gamma_;
};

// Recorded posterior stream, one vector per round starting at round 1.
class ReplaySource {
 public:
  ReplaySource(std::string path, std::map<std::size_t, std::vector<double>> rows);

  // Throws kReplayExhausted when no vector was recorded for the round.
  PosteriorVector at(const AgentScope& scope, std::size_t round) const;
  std::size_t length() const { return rows_.size(); }
  std::size_t last_round() const { return rows_.empty() ? 0 : rows_.rbegin()->first; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::map<std::size_t, std::vector<double>> rows_;
};

using PosteriorSource = std::variant<BayesOracle, NoisyOracle, ReplaySource>;

// Posterior for round `round` (>= 1). Symbol-driven sources require x;
// replay sources ignore it.
PosteriorVector posterior(const PosteriorSource& source, const AgentScope& scope,
                          std::optional<SymbolIndex> x, std::size_t round);

// Likelihood table behind a symbol-driven source; nullptr for replay.
const LikelihoodTable* likelihood_model(const PosteriorSource& source);

struct Agent {
  std::string name;
  AgentScope scope;
  PosteriorSource source;
};

// Replay CSV: header `round,agent_id,<label>...` with one column per class in
// the scope, in any order. Only rows for scope.agent_id() are kept. Zeros are
// floored and every row must sum to one within kStochasticTolerance.
ReplaySource load_replay(const std::string& path, const AgentScope& scope,
                         const ClassSet& classes);

}  // namespace myopic
