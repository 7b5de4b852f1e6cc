#ifndef LVBAL_GRAPH_HPP_
#define LVBAL_GRAPH_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace lvbal {

struct Edge {
  std::size_t u;
  std::size_t v;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected communication topology between household agents.
///
/// Every edge carries the same coupling gain `alpha`, so the adjacency
/// matrix has entries in {0, alpha}. Instances are immutable once built and
/// can be shared freely between threads.
class CommGraph {
 public:
  /// Throws std::invalid_argument on n == 0, alpha <= 0, a self-loop or an
  /// edge endpoint >= n. Duplicate edges (in either orientation) collapse.
  CommGraph(std::size_t n, std::span<const Edge> edges, double alpha);

  [[nodiscard]] std::size_t size() const noexcept { return neighbors_.size(); }
  [[nodiscard]] double alpha() const noexcept { return alpha_; }

  /// Sorted neighbour indices of agent i.
  [[nodiscard]] std::span<const std::size_t> neighbors(std::size_t i) const {
    return neighbors_.at(i);
  }
  [[nodiscard]] std::size_t degree(std::size_t i) const {
    return neighbors_.at(i).size();
  }
  [[nodiscard]] std::size_t max_degree() const noexcept;
  [[nodiscard]] bool has_edge(std::size_t u, std::size_t v) const;

  /// Normalised edge list: u < v, lexicographically sorted, no duplicates.
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept {
    return edges_;
  }

 private:
  double alpha_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

[[nodiscard]] CommGraph build_graph(std::size_t n, std::span<const Edge> edges,
                                    double alpha);

// Named topologies. ring(1) is a singleton and ring(2) a single edge.
[[nodiscard]] CommGraph ring_graph(std::size_t n, double alpha);
[[nodiscard]] CommGraph path_graph(std::size_t n, double alpha);
[[nodiscard]] CommGraph complete_graph(std::size_t n, double alpha);

/// L = D - A with d_i = sum_j a_ij.
[[nodiscard]] Eigen::MatrixXd laplacian(const CommGraph& g);

/// Breadth-first reachability from agent 0 covers every agent.
[[nodiscard]] bool is_connected(const CommGraph& g);

}  // namespace lvbal

#endif  // LVBAL_GRAPH_HPP_
