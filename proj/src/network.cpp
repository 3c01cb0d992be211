#include "myopic/network.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include "myopic/error.hpp"

namespace myopic {

AgentGraph AgentGraph::from_edges(std::size_t n, const std::vector<Edge>& edges) {
  if (n == 0) throw Error(ErrorCode::kParseError, "graph needs at least one agent");
  AgentGraph g(n);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) {
      throw Error(ErrorCode::kParseError, "edge (" + std::to_string(u) + ", " +
                                              std::to_string(v) + ") out of range for n = " +
                                              std::to_string(n));
    }
    if (u == v) continue;
    g.adjacency_[u * n + v] = 1;
    g.adjacency_[v * n + u] = 1;
  }
  g.finalize();
  return g;
}

AgentGraph AgentGraph::from_adjacency(const std::vector<std::vector<int>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0) throw Error(ErrorCode::kParseError, "adjacency matrix is empty");
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    if (adjacency[u].size() != n) throw Error(ErrorCode::kParseError, "adjacency is not square");
    for (std::size_t v = 0; v < n; ++v) {
      if ((adjacency[u][v] != 0) != (adjacency[v][u] != 0)) {
        throw Error(ErrorCode::kAsymmetricInput, "adjacency[" + std::to_string(u) + "][" +
                                                     std::to_string(v) + "] has no mirror entry");
      }
      if (u < v && adjacency[u][v] != 0) edges.emplace_back(u, v);
    }
  }
  return from_edges(n, edges);
}

void AgentGraph::finalize() {
  neighborhoods_.assign(n_, {});
  for (std::size_t i = 0; i < n_; ++i) {
    neighborhoods_[i].push_back(i);
    for (std::size_t j = 0; j < n_; ++j) {
      if (j != i && adjacent(i, j)) neighborhoods_[i].push_back(j);
    }
  }
}

std::vector<Edge> AgentGraph::edges() const {
  std::vector<Edge> out;
  for (std::size_t u = 0; u < n_; ++u) {
    for (std::size_t v = u + 1; v < n_; ++v) {
      if (adjacent(u, v)) out.emplace_back(u, v);
    }
  }
  return out;
}

namespace {

std::vector<std::size_t> bfs_distances(const AgentGraph& g, std::size_t source) {
  constexpr std::size_t kUnreached = static_cast<std::size_t>(-1);
  std::vector<std::size_t> dist(g.size(), kUnreached);
  std::queue<std::size_t> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : g.inclusive_neighborhood(u)) {
      if (dist[v] == kUnreached) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

}  // namespace

AgentGraph erdos_renyi_connected(std::size_t n, double p, Rng& rng, std::size_t max_retries) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "graph needs at least one agent");
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "edge probability must lie in (0, 1]");
  }
  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(max_retries, 1); ++attempt) {
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (rng.bernoulli(p)) edges.emplace_back(u, v);
      }
    }
    AgentGraph g = AgentGraph::from_edges(n, edges);
    if (is_connected(g)) return g;
  }
  throw Error(ErrorCode::kRetriesExhausted,
              "no connected G(" + std::to_string(n) + ", p) sample in " +
                  std::to_string(max_retries) + " attempts");
}

bool is_connected(const AgentGraph& g) {
  const auto dist = bfs_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(),
                      [](std::size_t d) { return d == static_cast<std::size_t>(-1); });
}

std::size_t diameter(const AgentGraph& g) {
  std::size_t best = 0;
  for (std::size_t s = 0; s < g.size(); ++s) {
    for (std::size_t d : bfs_distances(g, s)) {
      if (d == static_cast<std::size_t>(-1)) {
        throw Error(ErrorCode::kDisconnectedGraph, "diameter of a disconnected graph");
      }
      best = std::max(best, d);
    }
  }
  return best;
}

AgentGraph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  }
  return AgentGraph::from_edges(n, edges);
}

AgentGraph path_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u + 1 < n; ++u) edges.emplace_back(u, u + 1);
  return AgentGraph::from_edges(n, edges);
}

AgentGraph parse_graph(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_content_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      line = line.substr(0, line.find('#'));
      const auto first = line.find_first_not_of(" \t\r");
      if (first != std::string::npos) return true;
    }
    return false;
  };
  if (!next_content_line()) throw Error(ErrorCode::kParseError, "edge list is empty");
  std::istringstream header(line);
  long long n = 0;
  std::string trailing;
  if (!(header >> n) || n <= 0 || (header >> trailing)) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": expected a positive agent count");
  }
  std::vector<Edge> edges;
  while (next_content_line()) {
    std::istringstream fields(line);
    long long u = -1;
    long long v = -1;
    if (!(fields >> u >> v) || (fields >> trailing) || u < 0 || v < 0) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": expected 'u v', got '" + line + "'");
    }
    edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
  }
  return AgentGraph::from_edges(static_cast<std::size_t>(n), edges);
}

AgentGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open graph file " + path);
  try {
    return parse_graph(in);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
}

}  // namespace myopic
