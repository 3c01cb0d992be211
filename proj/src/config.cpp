#include "myopic/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "myopic/error.hpp"

namespace myopic {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kGraphStream = 0x6772617068ULL;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kConfigError, what); }

std::string resolve(const std::string& base_dir, const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) p = fs::path(base_dir) / p;
  return fs::absolute(p).lexically_normal().string();
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) config_error(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  return obj.contains(key) ? obj.at(key).get<T>() : fallback;
}

PosteriorSource parse_source(const json& spec, const AgentScope& scope, const ClassSet& classes,
                             const std::optional<World>& world,
                             const std::optional<LikelihoodTable>& override_table,
                             const std::string& base_dir, const std::string& who) {
  std::string kind = "bayes";
  if (spec.is_string()) {
    kind = spec.get<std::string>();
  } else if (spec.is_object()) {
    reject_unknown_keys(spec, {"kind", "gamma", "path"}, who + ".source");
    kind = spec.at("kind").get<std::string>();
  } else if (!spec.is_null()) {
    config_error(who + ".source must be a string or an object");
  }

  if (kind == "replay") {
    if (!spec.is_object() || !spec.contains("path")) config_error(who + ": replay needs a path");
    return load_replay(resolve(base_dir, spec.at("path").get<std::string>()), scope, classes);
  }
  if (!world) config_error(who + ": a " + kind + " classifier needs a world");
  BayesOracle oracle(override_table ? *override_table : world->likelihoods);
  if (kind == "bayes") return oracle;
  if (kind == "noisy") {
    if (!spec.is_object() || !spec.contains("gamma")) config_error(who + ": noisy needs gamma");
    return NoisyOracle(std::move(oracle), spec.at("gamma").get<double>());
  }
  config_error(who + ": unknown source kind '" + kind + "'");
}

AgentGraph parse_graph_spec(const json& spec, std::size_t n, std::uint64_t seed,
                            const std::string& base_dir) {
  if (!spec.is_object()) config_error("graph must be an object");
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "erdos_renyi") {
    reject_unknown_keys(spec, {"kind", "p", "max_retries", "seed"}, "graph");
    Rng rng = spec.contains("seed") ? Rng(spec.at("seed").get<std::uint64_t>())
                                    : Rng::for_stream(seed, kGraphStream);
    return erdos_renyi_connected(n, spec.at("p").get<double>(), rng,
                                 get_or<std::size_t>(spec, "max_retries", kDefaultMaxRetries));
  }
  if (kind == "edges") {
    reject_unknown_keys(spec, {"kind", "edges"}, "graph");
    return AgentGraph::from_edges(n, spec.at("edges").get<std::vector<Edge>>());
  }
  if (kind == "adjacency") {
    reject_unknown_keys(spec, {"kind", "matrix"}, "graph");
    AgentGraph g = AgentGraph::from_adjacency(spec.at("matrix").get<std::vector<std::vector<int>>>());
    if (g.size() != n) config_error("adjacency matrix size differs from the agent count");
    return g;
  }
  if (kind == "file") {
    reject_unknown_keys(spec, {"kind", "path"}, "graph");
    AgentGraph g = load_graph(resolve(base_dir, spec.at("path").get<std::string>()));
    if (g.size() != n) config_error("graph file size differs from the agent count");
    return g;
  }
  if (kind == "complete") return complete_graph(n);
  if (kind == "path") return path_graph(n);
  config_error("unknown graph kind '" + kind + "'");
}

LoadedConfig parse_config_impl(const json& doc, const std::string& base_dir,
                               const Overrides& overrides) {
  if (!doc.is_object()) config_error("config must be a JSON object");
  reject_unknown_keys(doc,
                      {"world", "classes", "true_class", "agents", "graph", "rule", "horizon",
                       "observation_mode", "seed", "rate_window", "local_only",
                       "enforce_identifiability", "output"},
                      "config");

  std::optional<World> world;
  if (doc.contains("world")) {
    const json& w = doc.at("world");
    world = w.is_string() ? load_world(resolve(base_dir, w.get<std::string>())) : world_from_json(w);
    if (doc.contains("classes") || doc.contains("true_class")) {
      config_error("give classes and true_class either in the world or at top level, not both");
    }
  }
  const ClassSet classes =
      world ? world->classes : ClassSet(doc.at("classes").get<std::vector<std::string>>());
  const ClassIndex truth =
      world ? world->true_class : classes.index_of(doc.at("true_class").get<std::string>());

  const std::uint64_t seed = overrides.seed.value_or(get_or<std::uint64_t>(doc, "seed", 0));

  std::vector<Agent> agents;
  const json& agent_specs = doc.at("agents");
  if (!agent_specs.is_array() || agent_specs.empty()) config_error("agents must be a non-empty array");
  for (std::size_t i = 0; i < agent_specs.size(); ++i) {
    const json& spec = agent_specs[i];
    const std::string who = "agents[" + std::to_string(i) + "]";
    reject_unknown_keys(spec, {"name", "classes", "prior", "source", "likelihoods"}, who);
    std::vector<ClassIndex> scope_classes;
    for (const auto& label : spec.at("classes").get<std::vector<std::string>>()) {
      scope_classes.push_back(classes.index_of(label));
    }
    AgentScope scope(i, std::move(scope_classes), classes.size(),
                     get_or<std::vector<double>>(spec, "prior", {}));
    std::optional<LikelihoodTable> override_table;
    if (spec.contains("likelihoods")) {
      if (!world) config_error(who + ": likelihood override needs a world");
      override_table.emplace(spec.at("likelihoods").get<std::vector<std::vector<double>>>());
    }
    PosteriorSource source =
        parse_source(spec.contains("source") ? spec.at("source") : json(), scope, classes, world,
                     override_table, base_dir, who);
    agents.push_back(Agent{get_or<std::string>(spec, "name", "agent" + std::to_string(i)),
                           std::move(scope), std::move(source)});
  }

  AgentGraph graph = doc.contains("graph")
                         ? parse_graph_spec(doc.at("graph"), agents.size(), seed, base_dir)
                         : complete_graph(agents.size());

  ExperimentConfig experiment{
      .classes = classes,
      .true_class = truth,
      .world = std::move(world),
      .agents = std::move(agents),
      .graph = std::move(graph),
      .rule = overrides.rule.value_or(parse_rule(get_or<std::string>(doc, "rule", "min"))),
      .horizon = overrides.horizon.value_or(get_or<std::size_t>(doc, "horizon", 500)),
      .observation_mode = parse_observation_mode(
          get_or<std::string>(doc, "observation_mode", "independent")),
      .seed = seed,
      .rate_window = get_or<double>(doc, "rate_window", 0.5),
      .local_only = overrides.local_only.value_or(get_or<bool>(doc, "local_only", false)),
      .enforce_identifiability = get_or<bool>(doc, "enforce_identifiability", false),
  };

  OutputPaths output;
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    reject_unknown_keys(o, {"dir", "trajectories", "summary", "manifest", "posteriors"}, "output");
    if (o.contains("dir")) output.dir = resolve(base_dir, o.at("dir").get<std::string>());
    output.trajectories = get_or<std::string>(o, "trajectories", output.trajectories);
    output.summary = get_or<std::string>(o, "summary", output.summary);
    output.manifest = get_or<std::string>(o, "manifest", output.manifest);
    output.posteriors = get_or<bool>(o, "posteriors", false);
  }
  if (overrides.out_dir) output.dir = *overrides.out_dir;

  validate(experiment);
  return LoadedConfig{std::move(experiment), std::move(output)};
}

}  // namespace

LoadedConfig parse_config(const json& doc, const std::string& base_dir,
                          const Overrides& overrides) {
  // A run manifest wraps the resolved config; accept it directly.
  if (doc.is_object() && doc.contains("manifest_version") && doc.contains("config")) {
    return parse_config(doc.at("config"), base_dir, overrides);
  }
  try {
    return parse_config_impl(doc, base_dir, overrides);
  } catch (const json::exception& e) {
    config_error(std::string("malformed config: ") + e.what());
  }
}

LoadedConfig load_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
  const fs::path base = fs::absolute(fs::path(path)).parent_path();
  return parse_config(doc, base.string(), overrides);
}

json resolved_config(const LoadedConfig& loaded) {
  const ExperimentConfig& c = loaded.experiment;
  json doc;
  if (c.world) {
    doc["world"] = world_to_json(*c.world);
  } else {
    doc["classes"] = c.classes.labels();
    doc["true_class"] = c.classes.label(c.true_class);
  }
  doc["agents"] = json::array();
  for (const Agent& a : c.agents) {
    json spec;
    spec["name"] = a.name;
    std::vector<std::string> labels;
    for (ClassIndex k : a.scope.classes()) labels.push_back(c.classes.label(k));
    spec["classes"] = labels;
    spec["prior"] = a.scope.prior();
    if (const auto* replay = std::get_if<ReplaySource>(&a.source)) {
      spec["source"] = {{"kind", "replay"}, {"path", replay->path()}};
    } else if (const auto* noisy = std::get_if<NoisyOracle>(&a.source)) {
      spec["source"] = {{"kind", "noisy"}, {"gamma", noisy->gamma()}};
    } else {
      spec["source"] = "bayes";
    }
    const LikelihoodTable* table = likelihood_model(a.source);
    if (table && c.world && table->source_rows() != c.world->likelihoods.source_rows()) {
      spec["likelihoods"] = table->source_rows();
    }
    doc["agents"].push_back(std::move(spec));
  }
  doc["graph"] = {{"kind", "edges"}, {"edges", c.graph.edges()}};
  doc["rule"] = std::string(to_string(c.rule));
  doc["horizon"] = c.horizon;
  doc["observation_mode"] = std::string(to_string(c.observation_mode));
  doc["seed"] = c.seed;
  doc["rate_window"] = c.rate_window;
  doc["local_only"] = c.local_only;
  doc["enforce_identifiability"] = c.enforce_identifiability;
  // The output directory is left out so manifests of identical runs written
  // to different directories stay byte-identical.
  doc["output"] = {{"trajectories", loaded.output.trajectories},
                   {"summary", loaded.output.summary},
                   {"manifest", loaded.output.manifest},
                   {"posteriors", loaded.output.posteriors}};
  return doc;
}

namespace {

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

}  // namespace

WrittenOutputs write_outputs(const LoadedConfig& config, const TrajectoryLog& log,
                             const ExperimentSummary& summary) {
  const fs::path dir(config.output.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());

  WrittenOutputs written;
  const fs::path trajectories = dir / config.output.trajectories;
  {
    auto out = open_for_write(trajectories);
    write_trajectories(log, out);
    finish(out, trajectories);
  }
  written.trajectories = trajectories.string();

  const fs::path summary_path = dir / config.output.summary;
  {
    auto out = open_for_write(summary_path);
    out << summary_to_json(config.experiment, log, summary).dump(2) << '\n';
    finish(out, summary_path);
  }
  written.summary = summary_path.string();

  if (config.output.posteriors) {
    for (const Agent& agent : config.experiment.agents) {
      const fs::path p = dir / ("posteriors_agent" + std::to_string(agent.scope.agent_id()) + ".csv");
      auto out = open_for_write(p);
      write_posterior_stream(log, agent, out);
      finish(out, p);
      written.posteriors.push_back(p.string());
    }
  }

  const fs::path manifest_path = dir / config.output.manifest;
  {
    json manifest;
    manifest["manifest_version"] = 1;
    manifest["config"] = resolved_config(config);
    manifest["seed"] = config.experiment.seed;
    manifest["outputs"] = {{"trajectories", config.output.trajectories},
                           {"summary", config.output.summary}};
    auto out = open_for_write(manifest_path);
    out << manifest.dump(2) << '\n';
    finish(out, manifest_path);
  }
  written.manifest = manifest_path.string();
  return written;
}

}  // namespace myopic
