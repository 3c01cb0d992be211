#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "myopic/rng.hpp"

namespace myopic {

using Edge = std::pair<std::size_t, std::size_t>;

// Undirected simple graph over agents 0..n-1 with precomputed inclusive
// neighborhoods (each N_i lists i first, then its neighbors ascending).
class AgentGraph {
 public:
  // Duplicate edges and self-loops are dropped. Throws kParseError on
  // out-of-range vertices.
  static AgentGraph from_edges(std::size_t n, const std::vector<Edge>& edges);
  // Throws kAsymmetricInput for a non-symmetric matrix.
  static AgentGraph from_adjacency(const std::vector<std::vector<int>>& adjacency);

  std::size_t size() const { return n_; }
  bool adjacent(std::size_t u, std::size_t v) const { return adjacency_[u * n_ + v] != 0; }
  const std::vector<std::size_t>& inclusive_neighborhood(std::size_t i) const {
    return neighborhoods_.at(i);
  }
  // Edges (u < v) in lexicographic order.
  std::vector<Edge> edges() const;

 private:
  explicit AgentGraph(std::size_t n) : n_(n), adjacency_(n * n, 0) {}
  void finalize();

  std::size_t n_;
  std::vector<char> adjacency_;
  std::vector<std::vector<std::size_t>> neighborhoods_;
};

inline constexpr std::size_t kDefaultMaxRetries = 1000;

// G(n, p) resampled until connected. Throws kRetriesExhausted.
AgentGraph erdos_renyi_connected(std::size_t n, double p, Rng& rng,
                                 std::size_t max_retries = kDefaultMaxRetries);

bool is_connected(const AgentGraph& g);
// Throws kDisconnectedGraph.
std::size_t diameter(const AgentGraph& g);

AgentGraph complete_graph(std::size_t n);
AgentGraph path_graph(std::size_t n);

// Edge-list text: first line n, then one "u v" pair per line.
AgentGraph parse_graph(std::istream& in);
AgentGraph load_graph(const std::string& path);

}  // namespace myopic
