#include "lvbal/graph.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

namespace lvbal {

CommGraph::CommGraph(std::size_t n, std::span<const Edge> edges, double alpha)
    : alpha_(alpha), neighbors_(n) {
  if (n == 0) throw std::invalid_argument("graph: agent count must be >= 1");
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("graph: coupling gain alpha must be > 0");
  }
  edges_.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw std::invalid_argument("graph: edge (" + std::to_string(e.u) + "," +
                                  std::to_string(e.v) +
                                  ") references an agent >= " +
                                  std::to_string(n));
    }
    if (e.u == e.v) {
      throw std::invalid_argument("graph: self-loop on agent " +
                                  std::to_string(e.u));
    }
    edges_.push_back(Edge{std::min(e.u, e.v), std::max(e.u, e.v)});
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  for (const auto& e : edges_) {
    neighbors_[e.u].push_back(e.v);
    neighbors_[e.v].push_back(e.u);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

std::size_t CommGraph::max_degree() const noexcept {
  std::size_t d = 0;
  for (const auto& nb : neighbors_) d = std::max(d, nb.size());
  return d;
}

bool CommGraph::has_edge(std::size_t u, std::size_t v) const {
  if (u >= size() || v >= size()) return false;
  const auto& nb = neighbors_[u];
  return std::binary_search(nb.begin(), nb.end(), v);
}

CommGraph build_graph(std::size_t n, std::span<const Edge> edges,
                      double alpha) {
  return CommGraph(n, edges, alpha);
}

CommGraph ring_graph(std::size_t n, double alpha) {
  std::vector<Edge> edges;
  if (n >= 2) {
    for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
    if (n >= 3) edges.push_back({n - 1, 0});
  }
  return CommGraph(n, edges, alpha);
}

CommGraph path_graph(std::size_t n, double alpha) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return CommGraph(n, edges, alpha);
}

CommGraph complete_graph(std::size_t n, double alpha) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j});
  }
  return CommGraph(n, edges, alpha);
}

Eigen::MatrixXd laplacian(const CommGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    lap(u, v) -= g.alpha();
    lap(v, u) -= g.alpha();
    lap(u, u) += g.alpha();
    lap(v, v) += g.alpha();
  }
  return lap;
}

bool is_connected(const CommGraph& g) {
  std::vector<bool> seen(g.size(), false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (auto v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == g.size();
}

}  // namespace lvbal
