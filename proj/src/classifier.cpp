#include "myopic/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "myopic/error.hpp"

namespace myopic {

AgentScope::AgentScope(std::size_t agent_id, std::vector<ClassIndex> classes,
                       std::size_t total_classes, std::vector<double> prior)
    : agent_id_(agent_id),
      classes_(std::move(classes)),
      prior_(std::move(prior)),
      total_classes_(total_classes),
      position_(total_classes) {
  const std::string who = "agent " + std::to_string(agent_id_);
  if (classes_.empty()) throw Error(ErrorCode::kInvalidScope, who + " has no identifiable class");
  for (std::size_t j = 0; j < classes_.size(); ++j) {
    const ClassIndex k = classes_[j];
    if (k >= total_classes_) throw Error(ErrorCode::kInvalidScope, who + ": class out of range");
    if (position_[k]) throw Error(ErrorCode::kInvalidScope, who + ": repeated class in scope");
    position_[k] = j;
  }
  if (prior_.empty()) {
    prior_.assign(classes_.size(), 1.0 / static_cast<double>(classes_.size()));
    return;
  }
  if (prior_.size() != classes_.size()) {
    throw Error(ErrorCode::kInvalidScope, who + ": prior length does not match scope");
  }
  const double sum = std::accumulate(prior_.begin(), prior_.end(), 0.0);
  const bool positive =
      std::all_of(prior_.begin(), prior_.end(), [](double p) { return p > 0.0 && std::isfinite(p); });
  if (!positive || std::abs(sum - 1.0) > kStochasticTolerance) {
    throw Error(ErrorCode::kInvalidScope, who + ": prior must be positive and sum to one");
  }
}

std::optional<std::size_t> AgentScope::position_of(ClassIndex k) const {
  if (k >= position_.size()) return std::nullopt;
  return position_[k];
}

std::size_t AgentScope::require_position(ClassIndex k) const {
  auto pos = position_of(k);
  if (!pos) {
    throw Error(ErrorCode::kClassOutOfScope,
                "class " + std::to_string(k) + " is not in the scope of agent " +
                    std::to_string(agent_id_));
  }
  return *pos;
}

PosteriorVector BayesOracle::operator()(const AgentScope& scope, SymbolIndex x) const {
  if (x >= likelihoods_.symbols()) {
    throw Error(ErrorCode::kSymbolUnknown, "symbol index " + std::to_string(x));
  }
  if (scope.total_classes() != likelihoods_.classes()) {
    throw Error(ErrorCode::kDimensionMismatch, "scope and likelihood table disagree on classes");
  }
  PosteriorVector out;
  out.probs.resize(scope.size());
  double evidence = 0.0;
  for (std::size_t j = 0; j < scope.size(); ++j) {
    out.probs[j] = likelihoods_.floored(scope.classes()[j], x) * scope.prior()[j];
    evidence += out.probs[j];
  }
  for (double& p : out.probs) p /= evidence;
  floor_and_normalize(out.probs);
  return out;
}

NoisyOracle::NoisyOracle(BayesOracle base, double gamma) : base_(std::move(base)), gamma_(gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise level must lie in [0, 1)");
  }
}

PosteriorVector NoisyOracle::operator()(const AgentScope& scope, SymbolIndex x) const {
  PosteriorVector out = base_(scope, x);
  if (gamma_ == 0.0) return out;
  const double uniform = 1.0 / static_cast<double>(out.probs.size());
  for (double& p : out.probs) p = (1.0 - gamma_) * p + gamma_ * uniform;
  return out;
}

ReplaySource::ReplaySource(std::string path, std::map<std::size_t, std::vector<double>> rows)
    : path_(std::move(path)), rows_(std::move(rows)) {}

PosteriorVector ReplaySource::at(const AgentScope& scope, std::size_t round) const {
  auto it = rows_.find(round);
  if (it == rows_.end()) {
    throw Error(ErrorCode::kReplayExhausted, path_ + " has no posterior for agent " +
                                                 std::to_string(scope.agent_id()) + " at round " +
                                                 std::to_string(round));
  }
  if (it->second.size() != scope.size()) {
    throw Error(ErrorCode::kDimensionMismatch, path_ + ": replay width does not match scope");
  }
  return PosteriorVector{it->second};
}

PosteriorVector posterior(const PosteriorSource& source, const AgentScope& scope,
                          std::optional<SymbolIndex> x, std::size_t round) {
  return std::visit(
      [&](const auto& s) -> PosteriorVector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ReplaySource>) {
          return s.at(scope, round);
        } else {
          if (!x) throw Error(ErrorCode::kInvalidArgument, "classifier needs an observation");
          return s(scope, *x);
        }
      },
      source);
}

const LikelihoodTable* likelihood_model(const PosteriorSource& source) {
  if (const auto* b = std::get_if<BayesOracle>(&source)) return &b->likelihoods();
  if (const auto* n = std::get_if<NoisyOracle>(&source)) return &n->likelihoods();
  return nullptr;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw Error(ErrorCode::kParseError, where + ": not a number '" + text + "'");
  }
  return v;
}

}  // namespace

ReplaySource load_replay(const std::string& path, const AgentScope& scope,
                         const ClassSet& classes) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open replay file " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParseError, path + ": empty replay file");
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "round" || header[1] != "agent_id") {
    throw Error(ErrorCode::kParseError, path + ": header must start with round,agent_id");
  }
  if (header.size() - 2 != scope.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                path + ": replay has " + std::to_string(header.size() - 2) +
                    " class columns, scope has " + std::to_string(scope.size()));
  }
  // column -> position in scope
  std::vector<std::size_t> column_position;
  std::vector<bool> seen(scope.size(), false);
  for (std::size_t c = 2; c < header.size(); ++c) {
    const ClassIndex k = classes.index_of(header[c]);
    const auto pos = scope.position_of(k);
    if (!pos || seen[*pos]) {
      throw Error(ErrorCode::kScopeMismatch, path + ": column '" + header[c] +
                                                 "' is not a distinct class of the agent scope");
    }
    seen[*pos] = true;
    column_position.push_back(*pos);
  }

  std::map<std::size_t, std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) throw Error(ErrorCode::kParseError, where + ": wrong width");
    const double round_value = parse_double(fields[0], where);
    const double agent_value = parse_double(fields[1], where);
    if (round_value < 1 || round_value != std::floor(round_value) || agent_value < 0 ||
        agent_value != std::floor(agent_value)) {
      throw Error(ErrorCode::kParseError, where + ": round must be >= 1, agent_id >= 0");
    }
    if (static_cast<std::size_t>(agent_value) != scope.agent_id()) continue;
    std::vector<double> probs(scope.size());
    double sum = 0.0;
    for (std::size_t c = 2; c < fields.size(); ++c) {
      const double v = parse_double(fields[c], where);
      if (!(v >= 0.0)) throw Error(ErrorCode::kParseError, where + ": negative probability");
      probs[column_position[c - 2]] = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      throw Error(ErrorCode::kParseError, where + ": posterior does not sum to one");
    }
    floor_and_normalize(probs);
    if (!rows.emplace(static_cast<std::size_t>(round_value), std::move(probs)).second) {
      throw Error(ErrorCode::kParseError, where + ": duplicate round for agent");
    }
  }
  return ReplaySource(path, std::move(rows));
}

}  // namespace myopic
