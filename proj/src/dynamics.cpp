#include "myopic/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "myopic/error.hpp"

namespace myopic {

std::string_view to_string(AggregationRule rule) {
  switch (rule) {
    case AggregationRule::kMin: return "min";
    case AggregationRule::kAvg: return "avg";
    case AggregationRule::kMax: return "max";
  }
  return "unknown";
}

AggregationRule parse_rule(std::string_view name) {
  if (name == "min") return AggregationRule::kMin;
  if (name == "avg") return AggregationRule::kAvg;
  if (name == "max") return AggregationRule::kMax;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown aggregation rule '" + std::string(name) + "' (expected min, avg or max)");
}

double logsumexp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

void normalize_log(std::span<double> values) {
  const double total = logsumexp(values);
  for (double& v : values) v = std::max(v - total, kLogBeliefFloor);
}

BeliefState init_beliefs(std::size_t agent_id, std::size_t class_count) {
  if (class_count < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two classes");
  const double uniform = -std::log(static_cast<double>(class_count));
  return BeliefState{agent_id, std::vector<double>(class_count, uniform),
                     std::vector<double>(class_count, uniform), 0};
}

BeliefState local_update(const BeliefState& state, const PosteriorVector& posterior,
                         const AgentScope& scope) {
  const std::size_t m = state.log_pi.size();
  if (scope.total_classes() != m || posterior.probs.size() != scope.size()) {
    throw Error(ErrorCode::kScopeMismatch, "posterior, scope and belief dimensions disagree");
  }
  BeliefState next = state;
  next.round = state.round + 1;
  double fill = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < scope.size(); ++j) {
    const ClassIndex k = scope.classes()[j];
    next.log_pi[k] =
        state.log_pi[k] + std::log(posterior.probs[j]) - std::log(scope.prior()[j]);
    fill = std::max(fill, next.log_pi[k]);
  }
  for (ClassIndex k = 0; k < m; ++k) {
    if (!scope.contains(k)) next.log_pi[k] = fill;
  }
  normalize_log(next.log_pi);
  return next;
}

namespace {

void check_inputs(std::span<const double> own_log_pi,
                  std::span<const std::span<const double>> neighbor_log_mus) {
  if (neighbor_log_mus.empty()) {
    throw Error(ErrorCode::kEmptyNeighborhood, "inclusive neighborhood must contain the agent");
  }
  for (const auto& mu : neighbor_log_mus) {
    if (mu.size() != own_log_pi.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "neighbor belief has the wrong length");
    }
  }
}

}  // namespace

std::vector<double> global_update_min(std::span<const double> own_log_pi,
                                      std::span<const std::span<const double>> neighbor_log_mus) {
  check_inputs(own_log_pi, neighbor_log_mus);
  std::vector<double> out(own_log_pi.begin(), own_log_pi.end());
  for (const auto& mu : neighbor_log_mus) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::min(out[k], mu[k]);
  }
  normalize_log(out);
  return out;
}

std::vector<double> global_update_max(std::span<const double> own_log_pi,
                                      std::span<const std::span<const double>> neighbor_log_mus) {
  check_inputs(own_log_pi, neighbor_log_mus);
  std::vector<double> out(own_log_pi.begin(), own_log_pi.end());
  for (const auto& mu : neighbor_log_mus) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::max(out[k], mu[k]);
  }
  normalize_log(out);
  return out;
}

std::vector<double> global_update_avg(std::span<const double> own_log_pi,
                                      std::span<const std::span<const double>> neighbor_log_mus) {
  check_inputs(own_log_pi, neighbor_log_mus);
  const double log_count = std::log(static_cast<double>(neighbor_log_mus.size() + 1));
  std::vector<double> out(own_log_pi.size());
  std::vector<double> terms(neighbor_log_mus.size() + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    terms[0] = own_log_pi[k];
    for (std::size_t j = 0; j < neighbor_log_mus.size(); ++j) terms[j + 1] = neighbor_log_mus[j][k];
    out[k] = logsumexp(terms) - log_count;
  }
  normalize_log(out);
  return out;
}

std::vector<double> global_update(AggregationRule rule, std::span<const double> own_log_pi,
                                  std::span<const std::span<const double>> neighbor_log_mus) {
  switch (rule) {
    case AggregationRule::kMin: return global_update_min(own_log_pi, neighbor_log_mus);
    case AggregationRule::kAvg: return global_update_avg(own_log_pi, neighbor_log_mus);
    case AggregationRule::kMax: return global_update_max(own_log_pi, neighbor_log_mus);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown aggregation rule");
}

double LogRatioDiagnostic::max_recursion_error() const {
  double worst = 0.0;
  for (std::size_t t = 0; t < rho.size(); ++t) {
    if (clamped[t]) break;
    worst = std::max(worst, std::abs(rho[t] - rho[0] - lambda_sum[t]));
  }
  return worst;
}

LogRatioDiagnostic log_ratio_diagnostics(std::span<const BeliefState> states,
                                         std::span<const PosteriorVector> posteriors,
                                         const AgentScope& scope, ClassIndex target,
                                         ClassIndex reference) {
  const auto jt = scope.position_of(target);
  const auto jr = scope.position_of(reference);
  if (!jt || !jr) {
    throw Error(ErrorCode::kScopeMismatch, "log-ratio diagnostics need both classes in scope");
  }
  if (states.empty() || posteriors.size() + 1 != states.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "need one posterior per local update");
  }
  LogRatioDiagnostic d;
  d.rho.reserve(states.size());
  d.lambda_sum.push_back(0.0);
  for (const BeliefState& s : states) {
    d.rho.push_back(s.log_pi[target] - s.log_pi[reference]);
    d.clamped.push_back(s.log_pi[target] <= kLogBeliefFloor ||
                        s.log_pi[reference] <= kLogBeliefFloor);
  }
  const double log_prior_ratio = std::log(scope.prior()[*jt]) - std::log(scope.prior()[*jr]);
  for (const PosteriorVector& post : posteriors) {
    const double step = std::log(post.probs[*jt]) - std::log(post.probs[*jr]) - log_prior_ratio;
    d.lambda.push_back(step);
    d.lambda_sum.push_back(d.lambda_sum.back() + step);
  }
  if (!d.lambda.empty()) d.mean_lambda = d.lambda_sum.back() / static_cast<double>(d.lambda.size());
  return d;
}

}  // namespace myopic
