#include "myopic/scores.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "myopic/error.hpp"

namespace myopic {

namespace {

const LikelihoodTable& require_model(const Agent& agent) {
  const LikelihoodTable* table = likelihood_model(agent.source);
  if (table == nullptr) {
    throw Error(ErrorCode::kTheoryUnavailable,
                "agent " + std::to_string(agent.scope.agent_id()) + " replays a recorded stream");
  }
  return *table;
}

// ln(post_k(x) / prior_k) for every in-scope k, indexed [x][position].
std::vector<std::vector<double>> log_evidence_ratios(const Agent& agent) {
  const LikelihoodTable& table = require_model(agent);
  std::vector<std::vector<double>> out(table.symbols());
  for (SymbolIndex x = 0; x < table.symbols(); ++x) {
    const PosteriorVector post = posterior(agent.source, agent.scope, x, 0);
    out[x].resize(agent.scope.size());
    for (std::size_t j = 0; j < agent.scope.size(); ++j) {
      out[x][j] = std::log(post.probs[j]) - std::log(agent.scope.prior()[j]);
    }
  }
  return out;
}

// sum_x weights[x] * (a_p(x) - a_q(x)). Swapping p and q negates every term
// exactly, so scores under a fixed weighting are exactly antisymmetric.
double weighted_log_ratio(const Agent& agent, std::span<const double> weights, ClassIndex p,
                          ClassIndex q) {
  const std::size_t jp = agent.scope.require_position(p);
  const std::size_t jq = agent.scope.require_position(q);
  const auto ratios = log_evidence_ratios(agent);
  double total = 0.0;
  for (SymbolIndex x = 0; x < weights.size(); ++x) {
    total += weights[x] * (ratios[x][jp] - ratios[x][jq]);
  }
  return total;
}

}  // namespace

double discriminative_score(const Agent& agent, ClassIndex p, ClassIndex q) {
  const LikelihoodTable& table = require_model(agent);
  if (p >= table.classes()) throw Error(ErrorCode::kClassOutOfScope, "class index out of range");
  return weighted_log_ratio(agent, table.row(p), p, q);
}

double discriminative_score(const World& world, const AgentScope& scope, ClassIndex p,
                            ClassIndex q) {
  const Agent agent{"", scope, BayesOracle(world.likelihoods)};
  return discriminative_score(agent, p, q);
}

double confusion_score(const Agent& agent, ClassIndex truth, ClassIndex p, ClassIndex q) {
  const LikelihoodTable& table = require_model(agent);
  if (truth >= table.classes()) throw Error(ErrorCode::kUnknownClass, "true class out of range");
  if (agent.scope.contains(truth)) {
    throw Error(ErrorCode::kTrueClassInScope,
                "agent " + std::to_string(agent.scope.agent_id()) +
                    " holds the generating class; use the discriminative score");
  }
  return weighted_log_ratio(agent, table.row(truth), p, q);
}

double confusion_score(const World& world, const AgentScope& scope, ClassIndex truth,
                       ClassIndex p, ClassIndex q) {
  const Agent agent{"", scope, BayesOracle(world.likelihoods)};
  return confusion_score(agent, truth, p, q);
}

double empirical_score(const Agent& agent, ClassIndex p, ClassIndex q, std::size_t samples,
                       Rng& rng) {
  if (samples == 0) throw Error(ErrorCode::kInvalidArgument, "empirical score needs samples");
  const LikelihoodTable& table = require_model(agent);
  agent.scope.require_position(p);
  std::vector<double> frequency(table.symbols(), 0.0);
  for (std::size_t s = 0; s < samples; ++s) frequency[sample_from_row(table, p, rng)] += 1.0;
  for (double& f : frequency) f /= static_cast<double>(samples);
  return weighted_log_ratio(agent, frequency, p, q);
}

std::vector<std::size_t> source_set(std::span<const Agent> agents, ClassIndex p, ClassIndex q) {
  std::vector<std::size_t> out;
  if (p == q) return out;
  for (const Agent& agent : agents) {
    if (!agent.scope.contains(p) || !agent.scope.contains(q)) continue;
    if (discriminative_score(agent, p, q) > 0.0) out.push_back(agent.scope.agent_id());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Largest confusion score D^truth(c, target) over c in scope \ {target}.
std::optional<double> best_confusion(const Agent& agent, ClassIndex truth, ClassIndex target) {
  if (agent.scope.contains(truth) || !agent.scope.contains(target)) return std::nullopt;
  std::optional<double> best;
  for (ClassIndex c : agent.scope.classes()) {
    if (c == target) continue;
    const double score = confusion_score(agent, truth, c, target);
    if (!best || score > *best) best = score;
  }
  return best;
}

}  // namespace

std::vector<std::size_t> support_set(std::span<const Agent> agents, ClassIndex truth,
                                     ClassIndex target) {
  std::vector<std::size_t> out;
  if (truth == target) return out;
  for (const Agent& agent : agents) {
    const auto best = best_confusion(agent, truth, target);
    if (best && *best > 0.0) out.push_back(agent.scope.agent_id());
  }
  std::sort(out.begin(), out.end());
  return out;
}

IdentifiabilityCheck check_global_identifiability(std::span<const Agent> agents,
                                                  std::size_t class_count) {
  IdentifiabilityCheck check;
  for (ClassIndex p = 0; p < class_count; ++p) {
    for (ClassIndex q = p + 1; q < class_count; ++q) {
      if (source_set(agents, p, q).empty() || source_set(agents, q, p).empty()) {
        check.uncovered.emplace_back(p, q);
      }
    }
  }
  check.identifiable = check.uncovered.empty();
  return check;
}

RejectionRate best_rejection_rate(std::span<const Agent> agents, ClassIndex truth,
                                  ClassIndex target) {
  const auto sources = source_set(agents, truth, target);
  const auto supports = support_set(agents, truth, target);
  std::optional<RejectionRate> best;
  auto consider = [&](double rate, std::size_t id) {
    if (!best || rate > best->rate || (rate == best->rate && id < best->agent)) {
      best = RejectionRate{rate, id};
    }
  };
  for (const Agent& agent : agents) {
    const std::size_t id = agent.scope.agent_id();
    if (std::binary_search(sources.begin(), sources.end(), id)) {
      consider(discriminative_score(agent, truth, target), id);
    }
    if (std::binary_search(supports.begin(), supports.end(), id)) {
      consider(*best_confusion(agent, truth, target), id);
    }
  }
  if (!best) {
    throw Error(ErrorCode::kNoRejector,
                "no source or support agent rejects class " + std::to_string(target));
  }
  return *best;
}

ScoreReport score_report(std::span<const Agent> agents, std::size_t class_count,
                         ClassIndex truth) {
  ScoreReport report;
  report.truth = truth;
  for (const Agent& agent : agents) {
    const auto& scope = agent.scope.classes();
    const bool confused = !agent.scope.contains(truth);
    for (ClassIndex p : scope) {
      for (ClassIndex q : scope) {
        if (p == q) continue;
        report.discriminative.push_back(
            {agent.scope.agent_id(), p, q, discriminative_score(agent, p, q)});
        if (confused) {
          report.confusion.push_back(
              {agent.scope.agent_id(), p, q, confusion_score(agent, truth, p, q)});
        }
      }
    }
  }
  for (ClassIndex p = 0; p < class_count; ++p) {
    for (ClassIndex q = 0; q < class_count; ++q) {
      if (p != q) report.source_sets.push_back({{p, q}, source_set(agents, p, q)});
    }
  }
  for (ClassIndex k = 0; k < class_count; ++k) {
    if (k == truth) continue;
    report.support_sets.emplace_back(k, support_set(agents, truth, k));
    std::optional<RejectionRate> rate;
    try {
      rate = best_rejection_rate(agents, truth, k);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoRejector) throw;
    }
    report.best_rate.emplace_back(k, rate);
  }
  report.identifiability = check_global_identifiability(agents, class_count);
  return report;
}

namespace {

std::string agent_label(std::span<const Agent> agents, std::size_t id) {
  for (const Agent& a : agents) {
    if (a.scope.agent_id() == id) return a.name.empty() ? std::to_string(id) : a.name;
  }
  return std::to_string(id);
}

nlohmann::json entries_json(const std::vector<ScoreEntry>& entries, const ClassSet& classes) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : entries) {
    out.push_back({{"agent", e.agent},
                   {"p", classes.label(e.p)},
                   {"q", classes.label(e.q)},
                   {"score", e.score}});
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const ScoreReport& report, const ClassSet& classes,
                       std::span<const Agent> agents) {
  nlohmann::json doc;
  doc["true_class"] = classes.label(report.truth);
  doc["identifiable"] = report.identifiability.identifiable;
  doc["uncovered_pairs"] = nlohmann::json::array();
  for (auto [p, q] : report.identifiability.uncovered) {
    doc["uncovered_pairs"].push_back({classes.label(p), classes.label(q)});
  }
  doc["agents"] = nlohmann::json::array();
  for (const Agent& a : agents) {
    std::vector<std::string> labels;
    for (ClassIndex k : a.scope.classes()) labels.push_back(classes.label(k));
    doc["agents"].push_back({{"id", a.scope.agent_id()}, {"name", a.name}, {"classes", labels}});
  }
  doc["discriminative"] = entries_json(report.discriminative, classes);
  doc["confusion"] = entries_json(report.confusion, classes);
  doc["source_sets"] = nlohmann::json::array();
  for (const auto& [pair, ids] : report.source_sets) {
    doc["source_sets"].push_back(
        {{"p", classes.label(pair.first)}, {"q", classes.label(pair.second)}, {"agents", ids}});
  }
  doc["support_sets"] = nlohmann::json::array();
  for (const auto& [k, ids] : report.support_sets) {
    doc["support_sets"].push_back({{"class", classes.label(k)}, {"agents", ids}});
  }
  doc["best_rate"] = nlohmann::json::array();
  for (const auto& [k, rate] : report.best_rate) {
    nlohmann::json entry{{"class", classes.label(k)}};
    if (rate) {
      entry["rate"] = rate->rate;
      entry["agent"] = rate->agent;
    } else {
      entry["rate"] = nullptr;
      entry["agent"] = nullptr;
    }
    doc["best_rate"].push_back(entry);
  }
  return doc;
}

std::string format_table(const ScoreReport& report, const ClassSet& classes,
                         std::span<const Agent> agents) {
  std::ostringstream out;
  char buf[160];
  out << "true class: " << classes.label(report.truth) << "\n\n";
  out << "discriminative scores D_i(p, q)\n";
  for (const auto& e : report.discriminative) {
    std::snprintf(buf, sizeof buf, "  %-8s %-8s %-8s %12.6f\n", agent_label(agents, e.agent).c_str(),
                  classes.label(e.p).c_str(), classes.label(e.q).c_str(), e.score);
    out << buf;
  }
  if (!report.confusion.empty()) {
    out << "confusion scores D_i^*(p, q)\n";
    for (const auto& e : report.confusion) {
      std::snprintf(buf, sizeof buf, "  %-8s %-8s %-8s %12.6f\n",
                    agent_label(agents, e.agent).c_str(), classes.label(e.p).c_str(),
                    classes.label(e.q).c_str(), e.score);
      out << buf;
    }
  }
  out << "best rejection rates\n";
  for (const auto& [k, rate] : report.best_rate) {
    if (rate) {
      std::snprintf(buf, sizeof buf, "  %-8s %12.6f  via %s\n", classes.label(k).c_str(),
                    rate->rate, agent_label(agents, rate->agent).c_str());
    } else {
      std::snprintf(buf, sizeof buf, "  %-8s %12s\n", classes.label(k).c_str(), "none");
    }
    out << buf;
  }
  out << "globally identifiable: " << (report.identifiability.identifiable ? "yes" : "no") << "\n";
  for (auto [p, q] : report.identifiability.uncovered) {
    out << "  uncovered pair (" << classes.label(p) << ", " << classes.label(q) << ")\n";
  }
  return out.str();
}

std::vector<Agent> bayes_agents(const World& world, std::span<const AgentScope> scopes) {
  std::vector<Agent> agents;
  agents.reserve(scopes.size());
  for (const AgentScope& scope : scopes) {
    agents.push_back(Agent{"", scope, BayesOracle(world.likelihoods)});
  }
  return agents;
}

}  // namespace myopic
