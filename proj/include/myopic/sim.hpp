#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "myopic/classifier.hpp"
#include "myopic/dynamics.hpp"
#include "myopic/network.hpp"
#include "myopic/scores.hpp"
#include "myopic/world.hpp"

namespace myopic {

enum class ObservationMode { kShared, kIndependent };

std::string_view to_string(ObservationMode mode);
ObservationMode parse_observation_mode(std::string_view name);

inline constexpr double kRateTolerance = 0.2;
inline constexpr std::size_t kMinRateSamples = 10;
// Global beliefs inherit clamped neighbor values shifted by normalization, so
// anything within ln(1e6) of the floor counts as clamped for rate fitting.
inline constexpr double kFloorMargin = 13.815510557964274;

struct ExperimentConfig {
  ClassSet classes;
  ClassIndex true_class;
  // Generative world; absent when every agent replays a recorded stream.
  std::optional<World> world;
  std::vector<Agent> agents;
  AgentGraph graph;
  AggregationRule rule = AggregationRule::kMin;
  std::size_t horizon = 500;
  ObservationMode observation_mode = ObservationMode::kIndependent;
  std::uint64_t seed = 0;
  double rate_window = 0.5;
  // Skip the network step; the global belief then tracks the local belief.
  bool local_only = false;
  bool enforce_identifiability = false;
};

// Throws kConfigError describing the first violated constraint.
void validate(const ExperimentConfig& config);

// True when every agent has a likelihood model, so scores are computable.
bool theory_available(const ExperimentConfig& config);

struct TrajectoryLog {
  std::vector<std::string> class_labels;
  ClassIndex true_class = 0;
  // rounds[t][i]: agent i after round t; rounds[0] is the initialization.
  std::vector<std::vector<BeliefState>> rounds;
  // posteriors[t - 1][i]: the classifier output agent i consumed in round t.
  std::vector<std::vector<PosteriorVector>> posteriors;

  std::size_t horizon() const { return rounds.empty() ? 0 : rounds.size() - 1; }
  std::size_t agent_count() const { return rounds.empty() ? 0 : rounds.front().size(); }
  std::size_t class_count() const { return class_labels.size(); }
};

// Synchronous rounds: observe, classify, local update, then aggregate
// the previous round's neighborhood global beliefs. Deterministic in the seed.
TrajectoryLog run_experiment(const ExperimentConfig& config);

struct RateFit {
  double slope;
  std::size_t first_round;  // inclusive window bounds
  std::size_t last_round;
  bool clamped;  // the trajectory reached the belief floor
};

// Least-squares slope of -ln mu_t(target) against t. The fit uses the
// trailing `rate_window` fraction of the rounds before the belief first comes
// within kFloorMargin of the floor. Throws kInsufficientSamples with fewer than kMinRateSamples.
RateFit estimate_rejection_rate(const TrajectoryLog& log, std::size_t agent, ClassIndex target,
                                double rate_window = 0.5);

double least_squares_slope(std::span<const double> x, std::span<const double> y);

// Smallest t such that the true class holds the strict argmax of mu at every
// round from t to the horizon.
std::optional<std::size_t> time_to_identification(const TrajectoryLog& log, std::size_t agent);
// First round at which the true class holds the strict argmax.
std::optional<std::size_t> first_identification(const TrajectoryLog& log, std::size_t agent);

struct ClassRateSummary {
  ClassIndex target;
  std::optional<RateFit> fit;
  std::string fit_error;  // set when fit is empty
  std::optional<RejectionRate> theory;
  std::optional<bool> pass;  // slope >= theory * (1 - kRateTolerance)
};

struct AgentSummary {
  std::size_t agent;
  std::optional<std::size_t> identification_time;
  std::optional<std::size_t> first_identification;
  double final_mu_true;
  std::vector<ClassRateSummary> rates;
};

struct ExperimentSummary {
  std::vector<AgentSummary> agents;
  bool theory_available = false;
};

// Theory is computed when the config has likelihood models for every agent
// and the network step is enabled.
ExperimentSummary summarize(const ExperimentConfig& config, const TrajectoryLog& log);

// CSV `round,agent,class,pi,mu,log_pi,log_mu`, one row per (round, agent, class).
void write_trajectories(const TrajectoryLog& log, std::ostream& out);
nlohmann::json summary_to_json(const ExperimentConfig& config, const TrajectoryLog& log,
                               const ExperimentSummary& summary);
// Replay CSV of the posteriors one agent consumed, readable by load_replay.
void write_posterior_stream(const TrajectoryLog& log, const Agent& agent, std::ostream& out);

// Shortest round-trip decimal form used by every writer.
std::string format_double(double value);

}  // namespace myopic
