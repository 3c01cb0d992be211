#include "myopic/world.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "myopic/error.hpp"

namespace myopic {

namespace {

template <typename Map>
Map build_index(const std::vector<std::string>& names, ErrorCode code, const char* what) {
  Map index;
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (!index.emplace(names[k], k).second) {
      throw Error(code, std::string("duplicate ") + what + " '" + names[k] + "'");
    }
  }
  return index;
}

}  // namespace

ClassSet::ClassSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "a class set needs at least two classes");
  }
  index_ = build_index<decltype(index_)>(labels_, ErrorCode::kInvalidArgument, "class label");
}

ClassIndex ClassSet::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw Error(ErrorCode::kUnknownClass, "'" + label + "'");
  return it->second;
}

InputSpace::InputSpace(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) throw Error(ErrorCode::kInvalidArgument, "input space is empty");
  index_ = build_index<decltype(index_)>(symbols_, ErrorCode::kInvalidArgument, "input symbol");
}

SymbolIndex InputSpace::index_of(const std::string& symbol) const {
  auto it = index_.find(symbol);
  if (it == index_.end()) throw Error(ErrorCode::kSymbolUnknown, "'" + symbol + "'");
  return it->second;
}

LikelihoodTable::LikelihoodTable(const std::vector<std::vector<double>>& rows)
    : source_rows_(rows) {
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "likelihood table is empty");
  }
  classes_ = rows.size();
  symbols_ = rows.front().size();
  values_.reserve(classes_ * symbols_);
  for (std::size_t k = 0; k < classes_; ++k) {
    const auto& row = rows[k];
    if (row.size() != symbols_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "likelihood row " + std::to_string(k) + " has " + std::to_string(row.size()) +
                      " entries, expected " + std::to_string(symbols_));
    }
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kRowNotStochastic,
                    "likelihood row " + std::to_string(k) + " has a negative or non-finite entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "likelihood row " << k << " sums to " << sum;
      throw Error(ErrorCode::kRowNotStochastic, msg.str());
    }
    for (double v : row) values_.push_back(v / sum);
  }
  floored_ = values_;
  for (std::size_t k = 0; k < classes_; ++k) {
    floor_and_normalize({floored_.data() + k * symbols_, symbols_});
  }
}

World build_world(ClassSet classes, InputSpace inputs, LikelihoodTable likelihoods,
                  const std::string& true_class) {
  if (likelihoods.classes() != classes.size() || likelihoods.symbols() != inputs.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "likelihood table is " + std::to_string(likelihoods.classes()) + "x" +
                    std::to_string(likelihoods.symbols()) + ", world is " +
                    std::to_string(classes.size()) + "x" + std::to_string(inputs.size()));
  }
  const ClassIndex truth = classes.index_of(true_class);
  return World{std::move(classes), std::move(inputs), std::move(likelihoods), truth};
}

SymbolIndex sample_from_row(const LikelihoodTable& table, ClassIndex k, Rng& rng) {
  return rng.categorical(table.row(k));
}

SymbolIndex sample_observation(const World& world, Rng& rng) {
  return sample_from_row(world.likelihoods, world.true_class, rng);
}

World world_from_json(const nlohmann::json& doc) {
  try {
    auto classes = doc.at("classes").get<std::vector<std::string>>();
    auto inputs = doc.at("inputs").get<std::vector<std::string>>();
    auto rows = doc.at("likelihoods").get<std::vector<std::vector<double>>>();
    auto truth = doc.at("true_class").get<std::string>();
    return build_world(ClassSet(std::move(classes)), InputSpace(std::move(inputs)),
                       LikelihoodTable(rows), truth);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("world definition: ") + e.what());
  }
}

nlohmann::json world_to_json(const World& world) {
  return {
      {"classes", world.classes.labels()},
      {"inputs", world.inputs.symbols()},
      {"likelihoods", world.likelihoods.source_rows()},
      {"true_class", world.classes.label(world.true_class)},
  };
}

World load_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open world file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
  return world_from_json(doc);
}

void floor_and_normalize(std::span<double> probs) {
  bool floored = false;
  for (double& p : probs) {
    if (!(p > 0.0)) {
      p = kProbabilityFloor;
      floored = true;
    }
  }
  if (!floored) return;
  const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= sum;
}

}  // namespace myopic
