#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "myopic/classifier.hpp"

namespace myopic {

// ln(1e-300). Log beliefs never go below this.
inline constexpr double kLogBeliefFloor = -690.77552789821368;

// Local (pi) and global (mu) beliefs of one agent over the full class set,
// both stored as normalized log-probabilities.
struct BeliefState {
  std::size_t agent_id = 0;
  std::vector<double> log_pi;
  std::vector<double> log_mu;
  std::size_t round = 0;
};

enum class AggregationRule { kMin, kAvg, kMax };

std::string_view to_string(AggregationRule rule);
// Throws kInvalidArgument.
AggregationRule parse_rule(std::string_view name);

double logsumexp(std::span<const double> values);
// Subtracts logsumexp, then clamps at kLogBeliefFloor.
void normalize_log(std::span<double> values);

BeliefState init_beliefs(std::size_t agent_id, std::size_t class_count);

// Reweights in-scope local beliefs by posterior/prior, fills every
// out-of-scope class with the largest reweighted in-scope value, normalizes.
// log_mu is carried over unchanged; round advances by one.
BeliefState local_update(const BeliefState& state, const PosteriorVector& posterior,
                         const AgentScope& scope);

// Each aggregator combines the agent's fresh local belief with the previous
// round's global beliefs of its inclusive neighborhood (own included) and
// returns the normalized log global belief.
std::vector<double> global_update_min(std::span<const double> own_log_pi,
                                      std::span<const std::span<const double>> neighbor_log_mus);
std::vector<double> global_update_avg(std::span<const double> own_log_pi,
                                      std::span<const std::span<const double>> neighbor_log_mus);
std::vector<double> global_update_max(std::span<const double> own_log_pi,
                                      std::span<const std::span<const double>> neighbor_log_mus);
std::vector<double> global_update(AggregationRule rule, std::span<const double> own_log_pi,
                                  std::span<const std::span<const double>> neighbor_log_mus);

// Log-ratio bookkeeping for a pair of in-scope classes. With reference = true
// class this is rho/lambda; with reference = another in-scope class of a
// support agent it is sigma/kappa.
struct LogRatioDiagnostic {
  std::vector<double> rho;         // ln pi_t(target) - ln pi_t(reference), t = 0..T
  std::vector<double> lambda;      // per-step increment, index t-1 for step t
  std::vector<double> lambda_sum;  // running sum, lambda_sum[0] = 0
  std::vector<bool> clamped;       // either belief sat at the floor at round t
  double mean_lambda = 0.0;

  // max_t |rho_t - rho_0 - lambda_sum_t| over rounds before the first clamp.
  double max_recursion_error() const;
};

// states[t] is the belief after t local updates; posteriors[t-1] drove step t.
// Throws kScopeMismatch when either class is outside the scope.
LogRatioDiagnostic log_ratio_diagnostics(std::span<const BeliefState> states,
                                         std::span<const PosteriorVector> posteriors,
                                         const AgentScope& scope, ClassIndex target,
                                         ClassIndex reference);

}  // namespace myopic
