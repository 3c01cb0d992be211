#include "myopic/sim.hpp"

#include <charconv>
#include <cmath>

#include "myopic/error.hpp"

namespace myopic {

std::string_view to_string(ObservationMode mode) {
  return mode == ObservationMode::kShared ? "shared" : "independent";
}

ObservationMode parse_observation_mode(std::string_view name) {
  if (name == "shared") return ObservationMode::kShared;
  if (name == "independent") return ObservationMode::kIndependent;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown observation mode '" + std::string(name) + "' (expected shared or independent)");
}

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kConfigError, what); }

}  // namespace

void validate(const ExperimentConfig& config) {
  const std::size_t m = config.classes.size();
  if (config.true_class >= m) config_error("true class out of range");
  if (config.agents.empty()) config_error("no agents");
  if (config.graph.size() != config.agents.size()) {
    config_error("graph has " + std::to_string(config.graph.size()) + " vertices for " +
                 std::to_string(config.agents.size()) + " agents");
  }
  if (!is_connected(config.graph)) config_error("communication graph is not connected");
  if (!(config.rate_window > 0.0 && config.rate_window <= 1.0)) {
    config_error("rate_window must lie in (0, 1]");
  }
  if (config.world) {
    if (config.world->classes.labels() != config.classes.labels()) {
      config_error("world classes differ from the experiment classes");
    }
    if (config.world->true_class != config.true_class) {
      config_error("world true class differs from the experiment true class");
    }
  }
  for (std::size_t i = 0; i < config.agents.size(); ++i) {
    const Agent& agent = config.agents[i];
    if (agent.scope.agent_id() != i) config_error("agent ids must be 0..n-1 in order");
    if (agent.scope.total_classes() != m) config_error("agent scope class count mismatch");
    if (const LikelihoodTable* table = likelihood_model(agent.source)) {
      if (!config.world) config_error("agent " + std::to_string(i) + " needs a world to observe");
      if (table->classes() != m || table->symbols() != config.world->inputs.size()) {
        config_error("agent " + std::to_string(i) + " likelihood table has the wrong shape");
      }
    }
  }
}

bool theory_available(const ExperimentConfig& config) {
  if (!config.world) return false;
  for (const Agent& a : config.agents) {
    if (likelihood_model(a.source) == nullptr) return false;
  }
  return true;
}

TrajectoryLog run_experiment(const ExperimentConfig& config) {
  validate(config);
  if (config.enforce_identifiability) {
    if (!theory_available(config)) {
      config_error("identifiability cannot be checked without likelihood models");
    }
    const auto check = check_global_identifiability(config.agents, config.classes.size());
    if (!check.identifiable) {
      const auto [p, q] = check.uncovered.front();
      throw Error(ErrorCode::kIdentifiabilityViolated,
                  "no agent distinguishes " + config.classes.label(p) + " and " +
                      config.classes.label(q));
    }
  }

  const std::size_t n = config.agents.size();
  const std::size_t m = config.classes.size();
  TrajectoryLog log;
  log.class_labels = config.classes.labels();
  log.true_class = config.true_class;
  log.rounds.reserve(config.horizon + 1);
  log.posteriors.reserve(config.horizon);

  std::vector<BeliefState> current;
  current.reserve(n);
  for (std::size_t i = 0; i < n; ++i) current.push_back(init_beliefs(i, m));
  log.rounds.push_back(current);

  // Stream 0 feeds the shared observation; stream i + 1 belongs to agent i.
  Rng shared_rng = Rng::for_stream(config.seed, 0);
  std::vector<Rng> agent_rngs;
  agent_rngs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) agent_rngs.push_back(Rng::for_stream(config.seed, i + 1));

  const bool shared = config.observation_mode == ObservationMode::kShared;
  std::vector<std::span<const double>> neighbor_mus;
  for (std::size_t t = 1; t <= config.horizon; ++t) {
    std::optional<SymbolIndex> shared_symbol;
    if (shared && config.world) shared_symbol = sample_observation(*config.world, shared_rng);

    std::vector<BeliefState> next;
    std::vector<PosteriorVector> consumed;
    next.reserve(n);
    consumed.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Agent& agent = config.agents[i];
      std::optional<SymbolIndex> x;
      if (const LikelihoodTable* table = likelihood_model(agent.source)) {
        x = shared ? shared_symbol : sample_from_row(*table, config.true_class, agent_rngs[i]);
      }
      consumed.push_back(posterior(agent.source, agent.scope, x, t));
      BeliefState state = local_update(current[i], consumed.back(), agent.scope);
      if (config.local_only) {
        state.log_mu = state.log_pi;
      } else {
        neighbor_mus.clear();
        for (std::size_t j : config.graph.inclusive_neighborhood(i)) {
          neighbor_mus.emplace_back(current[j].log_mu);
        }
        state.log_mu = global_update(config.rule, state.log_pi, neighbor_mus);
      }
      next.push_back(std::move(state));
    }
    current = next;
    log.rounds.push_back(std::move(next));
    log.posteriors.push_back(std::move(consumed));
  }
  return log;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kInsufficientSamples, "slope needs at least two points");
  }
  const double count = static_cast<double>(x.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mean_x += x[k];
    mean_y += y[k];
  }
  mean_x /= count;
  mean_y /= count;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mean_x) * (y[k] - mean_y);
    sxx += (x[k] - mean_x) * (x[k] - mean_x);
  }
  return sxy / sxx;
}

RateFit estimate_rejection_rate(const TrajectoryLog& log, std::size_t agent, ClassIndex target,
                                double rate_window) {
  if (agent >= log.agent_count()) throw Error(ErrorCode::kInvalidArgument, "agent out of range");
  if (target >= log.class_count() || target == log.true_class) {
    throw Error(ErrorCode::kInvalidArgument, "rejection rates apply to false classes only");
  }
  if (!(rate_window > 0.0 && rate_window <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rate_window must lie in (0, 1]");
  }
  std::size_t last = log.horizon();
  bool clamped = false;
  for (std::size_t t = 0; t <= log.horizon(); ++t) {
    if (log.rounds[t][agent].log_mu[target] <= kLogBeliefFloor + kFloorMargin) {
      clamped = true;
      if (t == 0) {
        throw Error(ErrorCode::kInsufficientSamples, "belief starts at the floor");
      }
      last = t - 1;
      break;
    }
  }
  const auto span = static_cast<std::size_t>(std::floor(rate_window * static_cast<double>(last)));
  const std::size_t first = last - span;
  if (last - first + 1 < kMinRateSamples) {
    throw Error(ErrorCode::kInsufficientSamples,
                "only " + std::to_string(last - first + 1) + " usable rounds for agent " +
                    std::to_string(agent) + ", class " + log.class_labels[target]);
  }
  std::vector<double> rounds;
  std::vector<double> values;
  for (std::size_t t = first; t <= last; ++t) {
    rounds.push_back(static_cast<double>(t));
    values.push_back(-log.rounds[t][agent].log_mu[target]);
  }
  return RateFit{least_squares_slope(rounds, values), first, last, clamped};
}

namespace {

bool true_class_leads(const TrajectoryLog& log, std::size_t t, std::size_t agent) {
  const auto& mu = log.rounds[t][agent].log_mu;
  for (ClassIndex k = 0; k < mu.size(); ++k) {
    if (k != log.true_class && !(mu[log.true_class] > mu[k])) return false;
  }
  return true;
}

}  // namespace

std::optional<std::size_t> time_to_identification(const TrajectoryLog& log, std::size_t agent) {
  if (log.rounds.empty()) return std::nullopt;
  std::optional<std::size_t> since;
  for (std::size_t t = log.horizon() + 1; t-- > 0;) {
    if (!true_class_leads(log, t, agent)) break;
    since = t;
  }
  return since;
}

std::optional<std::size_t> first_identification(const TrajectoryLog& log, std::size_t agent) {
  for (std::size_t t = 0; t < log.rounds.size(); ++t) {
    if (true_class_leads(log, t, agent)) return t;
  }
  return std::nullopt;
}

ExperimentSummary summarize(const ExperimentConfig& config, const TrajectoryLog& log) {
  ExperimentSummary summary;
  summary.theory_available = theory_available(config) && !config.local_only;
  std::vector<std::optional<RejectionRate>> theory(log.class_count());
  if (summary.theory_available) {
    for (ClassIndex k = 0; k < log.class_count(); ++k) {
      if (k == log.true_class) continue;
      try {
        theory[k] = best_rejection_rate(config.agents, log.true_class, k);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoRejector) throw;
      }
    }
  }
  for (std::size_t i = 0; i < log.agent_count(); ++i) {
    AgentSummary agent;
    agent.agent = i;
    agent.identification_time = time_to_identification(log, i);
    agent.first_identification = first_identification(log, i);
    agent.final_mu_true = std::exp(log.rounds.back()[i].log_mu[log.true_class]);
    for (ClassIndex k = 0; k < log.class_count(); ++k) {
      if (k == log.true_class) continue;
      ClassRateSummary rate;
      rate.target = k;
      rate.theory = theory[k];
      try {
        rate.fit = estimate_rejection_rate(log, i, k, config.rate_window);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInsufficientSamples) throw;
        rate.fit_error = e.what();
      }
      if (rate.fit && rate.theory) {
        rate.pass = rate.fit->slope >= rate.theory->rate * (1.0 - kRateTolerance);
      }
      agent.rates.push_back(std::move(rate));
    }
    summary.agents.push_back(std::move(agent));
  }
  return summary;
}

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

void write_trajectories(const TrajectoryLog& log, std::ostream& out) {
  out << "round,agent,class,pi,mu,log_pi,log_mu\n";
  for (std::size_t t = 0; t < log.rounds.size(); ++t) {
    for (const BeliefState& s : log.rounds[t]) {
      for (ClassIndex k = 0; k < log.class_count(); ++k) {
        out << t << ',' << s.agent_id << ',' << log.class_labels[k] << ','
            << format_double(std::exp(s.log_pi[k])) << ',' << format_double(std::exp(s.log_mu[k]))
            << ',' << format_double(s.log_pi[k]) << ',' << format_double(s.log_mu[k]) << '\n';
      }
    }
  }
}

namespace {

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json summary_to_json(const ExperimentConfig& config, const TrajectoryLog& log,
                               const ExperimentSummary& summary) {
  nlohmann::json doc;
  doc["rule"] = std::string(to_string(config.rule));
  doc["horizon"] = log.horizon();
  doc["seed"] = config.seed;
  doc["observation_mode"] = std::string(to_string(config.observation_mode));
  doc["local_only"] = config.local_only;
  doc["true_class"] = log.class_labels[log.true_class];
  doc["rate_window"] = config.rate_window;
  doc["tolerance"] = kRateTolerance;
  doc["theory_available"] = summary.theory_available;

  std::size_t checked = 0;
  std::size_t passed = 0;
  bool all_identified = true;
  doc["agents"] = nlohmann::json::array();
  for (const AgentSummary& a : summary.agents) {
    nlohmann::json entry;
    entry["id"] = a.agent;
    entry["name"] = config.agents[a.agent].name;
    entry["identification_time"] = optional_json(a.identification_time);
    entry["first_identification"] = optional_json(a.first_identification);
    entry["final_mu_true"] = a.final_mu_true;
    all_identified = all_identified && a.identification_time.has_value();
    entry["rates"] = nlohmann::json::array();
    for (const ClassRateSummary& r : a.rates) {
      nlohmann::json rate;
      rate["class"] = log.class_labels[r.target];
      if (r.fit) {
        rate["slope"] = r.fit->slope;
        rate["window"] = {r.fit->first_round, r.fit->last_round};
        rate["clamped"] = r.fit->clamped;
      } else {
        rate["slope"] = nullptr;
        rate["error"] = r.fit_error;
      }
      if (r.theory) {
        rate["theory_rate"] = r.theory->rate;
        rate["theory_agent"] = r.theory->agent;
      } else {
        rate["theory_rate"] = nullptr;
        rate["theory_agent"] = nullptr;
      }
      rate["pass"] = optional_json(r.pass);
      if (r.pass) {
        ++checked;
        if (*r.pass) ++passed;
      }
      entry["rates"].push_back(std::move(rate));
    }
    doc["agents"].push_back(std::move(entry));
  }
  doc["all_identified"] = all_identified;
  doc["rate_checks"] = {{"checked", checked}, {"passed", passed}};
  return doc;
}

void write_posterior_stream(const TrajectoryLog& log, const Agent& agent, std::ostream& out) {
  const std::size_t i = agent.scope.agent_id();
  out << "round,agent_id";
  for (ClassIndex k : agent.scope.classes()) out << ',' << log.class_labels[k];
  out << '\n';
  for (std::size_t t = 1; t <= log.posteriors.size(); ++t) {
    out << t << ',' << i;
    for (double p : log.posteriors[t - 1][i].probs) out << ',' << format_double(p);
    out << '\n';
  }
}

}  // namespace myopic
