#include "myopic/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "myopic/config.hpp"
#include "myopic/error.hpp"
#include "myopic/scores.hpp"
#include "myopic/sim.hpp"

namespace myopic::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_logger_mt("myopic");
    const char* level = std::getenv("MYOPIC_CROWD_LOG");
    l->set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
    l->set_pattern("[%l] %v");
    return l;
  }();
  return instance;
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::optional<std::string> rule;
  std::optional<std::string> out;
  bool local_only = false;
  std::size_t seeds = 1;
};

Overrides to_overrides(const Options& o) {
  Overrides ov;
  ov.seed = o.seed;
  ov.horizon = o.horizon;
  if (o.rule) ov.rule = parse_rule(*o.rule);
  ov.out_dir = o.out;
  if (o.local_only) ov.local_only = true;
  return ov;
}

LoadedConfig load(const Options& o, std::optional<std::uint64_t> seed = std::nullopt,
                  std::optional<AggregationRule> rule = std::nullopt) {
  Overrides ov = to_overrides(o);
  if (seed) ov.seed = seed;
  if (rule) ov.rule = rule;
  return load_config(o.config, ov);
}

void write_json(const fs::path& path, const json& doc) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::string show(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : std::string("none");
}

std::vector<std::uint64_t> sweep_seeds(const LoadedConfig& base, std::size_t count) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t s = 0; s < std::max<std::size_t>(count, 1); ++s) {
    seeds.push_back(base.experiment.seed + s);
  }
  return seeds;
}

int cmd_scores(const Options& o, std::ostream& out) {
  const LoadedConfig config = load(o);
  const ExperimentConfig& c = config.experiment;
  if (!theory_available(c)) {
    throw Error(ErrorCode::kTheoryUnavailable, "theory unavailable: config has replay-only agents");
  }
  const ScoreReport report = score_report(c.agents, c.classes.size(), c.true_class);
  out << format_table(report, c.classes, c.agents);
  const fs::path path = fs::path(config.output.dir) / "scores.json";
  write_json(path, to_json(report, c.classes, c.agents));
  out << "report: " << path.string() << "\n";
  return report.identifiability.identifiable ? kOk : kNotIdentifiable;
}

int cmd_run(const Options& o, std::ostream& out) {
  const LoadedConfig first = load(o);
  const auto seeds = sweep_seeds(first, o.seeds);
  for (std::uint64_t seed : seeds) {
    LoadedConfig config = seeds.size() == 1 ? first : load(o, seed);
    if (seeds.size() > 1) {
      config.output.dir = (fs::path(first.output.dir) / ("seed_" + std::to_string(seed))).string();
    }
    logger()->info("running seed {} for {} rounds", seed, config.experiment.horizon);
    const TrajectoryLog log = run_experiment(config.experiment);
    const ExperimentSummary summary = summarize(config.experiment, log);
    const WrittenOutputs written = write_outputs(config, log, summary);
    out << "seed " << seed << ": " << written.trajectories << ", " << written.summary << "\n";
    for (const AgentSummary& a : summary.agents) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %-10s identified at %-6s final mu(true) %.6f\n",
                    config.experiment.agents[a.agent].name.c_str(),
                    show(a.identification_time).c_str(), a.final_mu_true);
      out << buf;
    }
  }
  return kOk;
}

int cmd_rates(const Options& o, std::ostream& out) {
  const LoadedConfig first = load(o);
  if (!theory_available(first.experiment)) {
    throw Error(ErrorCode::kTheoryUnavailable, "theory unavailable: config has replay-only agents");
  }
  if (first.experiment.local_only) {
    throw Error(ErrorCode::kTheoryUnavailable, "rate bounds describe the networked rule");
  }
  std::size_t checked = 0;
  std::size_t passed = 0;
  std::size_t insufficient = 0;
  json rows = json::array();
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-8s %-10s %-8s %12s %12s  %s\n", "seed", "agent", "class",
                "slope", "bound", "result");
  out << buf;
  for (std::uint64_t seed : sweep_seeds(first, o.seeds)) {
    const LoadedConfig config = load(o, seed);
    const ExperimentConfig& c = config.experiment;
    const TrajectoryLog log = run_experiment(c);
    const ExperimentSummary summary = summarize(c, log);
    for (const AgentSummary& a : summary.agents) {
      for (const ClassRateSummary& r : a.rates) {
        json row{{"seed", seed}, {"agent", a.agent}, {"class", c.classes.label(r.target)}};
        std::string result;
        if (!r.fit) {
          ++insufficient;
          result = "insufficient samples";
          row["error"] = r.fit_error;
        } else if (!r.theory) {
          result = "no rejector";
        } else {
          ++checked;
          passed += *r.pass ? 1 : 0;
          result = *r.pass ? "pass" : "FAIL";
          row["slope"] = r.fit->slope;
          row["theory_rate"] = r.theory->rate;
          row["pass"] = *r.pass;
        }
        std::snprintf(buf, sizeof buf, "%-8llu %-10s %-8s %12s %12s  %s\n",
                      static_cast<unsigned long long>(seed), c.agents[a.agent].name.c_str(),
                      c.classes.label(r.target).c_str(),
                      r.fit ? format_double(std::round(r.fit->slope * 1e6) / 1e6).c_str() : "-",
                      r.theory ? format_double(std::round(r.theory->rate * 1e6) / 1e6).c_str() : "-",
                      result.c_str());
        out << buf;
        rows.push_back(std::move(row));
      }
    }
  }
  const double fraction =
      checked == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(checked);
  json report{{"checks", rows},
              {"checked", checked},
              {"passed", passed},
              {"insufficient", insufficient},
              {"pass_fraction", fraction},
              {"required_fraction", kRequiredPassFraction},
              {"tolerance", kRateTolerance}};
  const fs::path path = fs::path(first.output.dir) / "rates.json";
  write_json(path, report);
  out << passed << "/" << checked << " rate checks pass (" << fraction * 100.0 << "%)";
  if (insufficient) out << ", " << insufficient << " with insufficient samples";
  out << "\nreport: " << path.string() << "\n";
  if (insufficient) return kInsufficientData;
  return fraction >= kRequiredPassFraction ? kOk : kBoundViolated;
}

// Lower median with "never identified" sorted last.
std::optional<std::size_t> median_time(std::vector<std::optional<std::size_t>> times) {
  std::sort(times.begin(), times.end(), [](const auto& a, const auto& b) {
    return a.value_or(std::numeric_limits<std::size_t>::max()) <
           b.value_or(std::numeric_limits<std::size_t>::max());
  });
  return times[(times.size() - 1) / 2];
}

int cmd_compare(const Options& o, std::ostream& out) {
  const LoadedConfig first = load(o);
  const auto seeds = sweep_seeds(first, o.seeds);
  const std::size_t n = first.experiment.agents.size();
  json rules = json::array();
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-5s %-10s %14s %14s %12s %10s\n", "rule", "agent",
                "median ident", "unidentified", "median mu*", "mu*>=0.99");
  out << buf;
  for (AggregationRule rule : {AggregationRule::kMin, AggregationRule::kAvg, AggregationRule::kMax}) {
    std::vector<std::vector<std::optional<std::size_t>>> times(n);
    std::vector<std::vector<double>> finals(n);
    json runs = json::array();
    for (std::uint64_t seed : seeds) {
      const LoadedConfig config = load(o, seed, rule);
      const TrajectoryLog log = run_experiment(config.experiment);
      json per_agent = json::array();
      for (std::size_t i = 0; i < n; ++i) {
        const auto t = time_to_identification(log, i);
        const double mu = std::exp(log.rounds.back()[i].log_mu[log.true_class]);
        times[i].push_back(t);
        finals[i].push_back(mu);
        per_agent.push_back({{"agent", i},
                             {"identification_time", t ? json(*t) : json(nullptr)},
                             {"final_mu_true", mu}});
      }
      runs.push_back({{"seed", seed}, {"agents", per_agent}});
    }
    json agents = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      const auto median = median_time(times[i]);
      const auto never = static_cast<std::size_t>(
          std::count_if(times[i].begin(), times[i].end(), [](const auto& t) { return !t; }));
      const auto reached = static_cast<std::size_t>(
          std::count_if(finals[i].begin(), finals[i].end(), [](double mu) { return mu >= 0.99; }));
      std::vector<double> sorted = finals[i];
      std::sort(sorted.begin(), sorted.end());
      const double median_mu = sorted[(sorted.size() - 1) / 2];
      agents.push_back({{"agent", i},
                        {"name", first.experiment.agents[i].name},
                        {"median_identification_time", median ? json(*median) : json(nullptr)},
                        {"unidentified_runs", never},
                        {"median_final_mu_true", median_mu},
                        {"runs_reaching_0.99", reached}});
      std::snprintf(buf, sizeof buf, "%-5s %-10s %14s %14zu %12.6f %10zu\n",
                    std::string(to_string(rule)).c_str(),
                    first.experiment.agents[i].name.c_str(), show(median).c_str(), never,
                    median_mu, reached);
      out << buf;
    }
    rules.push_back({{"rule", std::string(to_string(rule))}, {"agents", agents}, {"runs", runs}});
  }
  const fs::path path = fs::path(first.output.dir) / "compare.json";
  write_json(path, json{{"seeds", seeds}, {"horizon", first.experiment.horizon}, {"rules", rules}});
  out << "report: " << path.string() << "\n";
  return kOk;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const LoadedConfig config = load(o);
  const ExperimentConfig& c = config.experiment;
  out << "classes: " << c.classes.size() << ", true class " << c.classes.label(c.true_class)
      << "\n";
  out << "agents: " << c.agents.size() << ", edges: " << c.graph.edges().size()
      << ", diameter: " << diameter(c.graph) << "\n";
  out << "rule: " << to_string(c.rule) << ", horizon: " << c.horizon
      << ", observations: " << to_string(c.observation_mode) << ", seed: " << c.seed << "\n";
  if (theory_available(c)) {
    const auto check = check_global_identifiability(c.agents, c.classes.size());
    out << "globally identifiable: " << (check.identifiable ? "yes" : "no") << "\n";
  } else {
    out << "globally identifiable: unknown (replay sources)\n";
  }
  out << "config ok\n";
  return kOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kIdentifiabilityViolated: return kNotIdentifiable;
    case ErrorCode::kInsufficientSamples: return kInsufficientData;
    default: return kFailure;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed classification with partially informative agents", "myopic-crowd"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool sweep) {
    sub->add_option("--config", o.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--horizon", o.horizon, "Number of rounds");
    sub->add_option("--rule", o.rule, "Aggregation rule")->check(CLI::IsMember({"min", "avg", "max"}));
    sub->add_option("--out", o.out, "Output directory");
    sub->add_flag("--local-only", o.local_only, "Disable the network step");
    if (sweep) sub->add_option("--seeds", o.seeds, "Number of consecutive seeds to sweep");
  };
  auto* scores = app.add_subcommand("scores", "Score report and identifiability check");
  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write its outputs");
  auto* rates = app.add_subcommand("rates", "Check fitted rejection rates against the theory");
  auto* compare = app.add_subcommand("compare", "Compare min, avg and max aggregation");
  auto* validate_cmd = app.add_subcommand("validate", "Validate a config");
  add_common(scores, false);
  add_common(run_cmd, true);
  add_common(rates, true);
  add_common(compare, true);
  add_common(validate_cmd, false);
  o.seeds = 1;

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kFailure;
  }

  try {
    if (*scores) return cmd_scores(o, out);
    if (*run_cmd) return cmd_run(o, out);
    if (*rates) {
      if (rates->count("--seeds") == 0) o.seeds = 20;
      return cmd_rates(o, out);
    }
    if (*compare) {
      if (compare->count("--seeds") == 0) o.seeds = 20;
      return cmd_compare(o, out);
    }
    if (*validate_cmd) return cmd_validate(o, out);
  } catch (const Error& e) {
    logger()->debug("failed with {}", to_string(e.code()));
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace myopic::cli
