#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "myopic/rng.hpp"

namespace myopic {

using ClassIndex = std::size_t;
using SymbolIndex = std::size_t;

// Floor applied to zero likelihood and posterior entries before any log.
inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kStochasticTolerance = 1e-9;

// Ordered set of class labels, at least two.
class ClassSet {
 public:
  explicit ClassSet(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(ClassIndex k) const { return labels_.at(k); }
  const std::vector<std::string>& labels() const { return labels_; }
  bool contains(const std::string& label) const { return index_.count(label) != 0; }
  // Throws kUnknownClass.
  ClassIndex index_of(const std::string& label) const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, ClassIndex> index_;
};

class InputSpace {
 public:
  explicit InputSpace(std::vector<std::string> symbols);

  std::size_t size() const { return symbols_.size(); }
  const std::string& symbol(SymbolIndex x) const { return symbols_.at(x); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  // Throws kSymbolUnknown.
  SymbolIndex index_of(const std::string& symbol) const;

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, SymbolIndex> index_;
};

// Row-stochastic class x symbol table of p(x | class).
class LikelihoodTable {
 public:
  // Rows within kStochasticTolerance of summing to one are renormalized;
  // anything else (or a negative entry) throws kRowNotStochastic.
  explicit LikelihoodTable(const std::vector<std::vector<double>>& rows);

  std::size_t classes() const { return classes_; }
  std::size_t symbols() const { return symbols_; }
  double at(ClassIndex k, SymbolIndex x) const { return values_[k * symbols_ + x]; }
  std::span<const double> row(ClassIndex k) const {
    return {values_.data() + k * symbols_, symbols_};
  }
  // at(k, x) floored at kProbabilityFloor, row renormalized.
  double floored(ClassIndex k, SymbolIndex x) const { return floored_[k * symbols_ + x]; }

  // The rows exactly as given to the constructor, before renormalization.
  const std::vector<std::vector<double>>& source_rows() const { return source_rows_; }

 private:
  std::vector<std::vector<double>> source_rows_;
  std::size_t classes_ = 0;
  std::size_t symbols_ = 0;
  std::vector<double> values_;
  std::vector<double> floored_;
};

struct World {
  ClassSet classes;
  InputSpace inputs;
  LikelihoodTable likelihoods;
  ClassIndex true_class;
};

// Validates dimensions and the true class label.
World build_world(ClassSet classes, InputSpace inputs, LikelihoodTable likelihoods,
                  const std::string& true_class);

// Draws x with probability p(x | true class).
SymbolIndex sample_observation(const World& world, Rng& rng);
SymbolIndex sample_from_row(const LikelihoodTable& table, ClassIndex k, Rng& rng);

// World definition document: {classes, inputs, likelihoods, true_class}.
World world_from_json(const nlohmann::json& doc);
nlohmann::json world_to_json(const World& world);
World load_world(const std::string& path);

// In-place: zero entries are raised to kProbabilityFloor, and only then is the
// vector renormalized, so strictly positive vectors pass through bitwise.
void floor_and_normalize(std::span<double> probs);

}  // namespace myopic
