#ifndef LVBAL_CLUSTERING_HPP_
#define LVBAL_CLUSTERING_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lvbal/graph.hpp"

namespace lvbal {

enum class Metric { circular, euclidean };

struct ClusterConfig {
  std::size_t clusters = 3;
  double dt_inner = 0.1;
  /// Convergence threshold on the largest estimate change in one step.
  double tol = 1e-12;
  std::size_t max_iter = 5000;
  Metric metric = Metric::circular;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Wraps an angle in degrees into (-180, 180].
[[nodiscard]] double wrap_degrees(double deg);

/// |wrap(a - b)| for the circular metric, |a - b| for euclidean.
[[nodiscard]] double feature_distance(double a, double b, Metric metric);

/// Index of the centroid nearest to x; ties resolve to the lowest index.
/// Throws std::invalid_argument on an empty centroid list.
[[nodiscard]] std::size_t assign_cluster(double x,
                                         std::span<const double> centroids,
                                         Metric metric);

/// {0, -120, +120} for three clusters; in general j * (-360 / m), wrapped.
[[nodiscard]] std::vector<double> nominal_phase_priors(std::size_t clusters);

/// Uniform draws in (-180, 180] shared by every agent.
[[nodiscard]] std::vector<double> random_centroids(std::size_t clusters,
                                                   std::uint64_t seed);

/// Per-agent running estimates for all clusters.
///
/// Rows are agents, columns are clusters (0-based labels). `xbar` tracks the
/// feature average of each cluster, `zbar` the auxiliary average and
/// `indicator` the fraction of all agents that belong to each cluster.
/// `x_feat` / `z_aux` hold the inputs the estimates currently account for;
/// the sum of `xbar(i, k)` over the members of cluster k always equals the
/// sum of their `x_feat` (same for `zbar` / `z_aux`).
struct EstimatorState {
  Eigen::MatrixXd xbar;
  Eigen::MatrixXd zbar;
  Eigen::MatrixXd indicator;
  Eigen::MatrixXd prev_dx;
  Eigen::MatrixXd prev_dz;
  Eigen::MatrixXd prev_dind;
  std::vector<double> x_feat;
  std::vector<double> z_aux;
  std::vector<std::size_t> assignment;
  /// Membership the auxiliary and indicator channels were last updated for.
  std::vector<std::size_t> aux_assignment;

  [[nodiscard]] std::size_t agents() const noexcept { return x_feat.size(); }
  [[nodiscard]] std::size_t clusters() const noexcept {
    return static_cast<std::size_t>(xbar.cols());
  }
};

/// Seeds every agent with the same centroid estimates, assigns each agent to
/// its nearest centroid and initialises the agent's own-cluster estimates
/// with its own inputs.
[[nodiscard]] EstimatorState init_estimator(std::span<const double> features,
                                            std::span<const double> aux,
                                            std::span<const double> centroids,
                                            Metric metric);

/// Virtual links of one membership: for cluster j and member i, the members
/// reachable from i over paths whose interior agents are all outside j.
/// Non-members have empty lists.
class ClusterLinks {
 public:
  ClusterLinks() = default;
  ClusterLinks(const CommGraph& g, std::span<const std::size_t> assignment,
               std::size_t clusters);

  [[nodiscard]] std::span<const std::size_t> of(std::size_t cluster,
                                                std::size_t agent) const {
    return links_[cluster][agent];
  }
  [[nodiscard]] std::size_t max_degree() const noexcept { return max_degree_; }

 private:
  std::vector<std::vector<std::vector<std::size_t>>> links_;
  std::size_t max_degree_ = 0;
};

/// 1 / (alpha * d), d the larger of the graph and virtual-link degrees.
/// Gershgorin bound: Euler steps strictly below it are stable.
[[nodiscard]] double euler_step_bound(const CommGraph& g,
                                      std::span<const std::size_t> assignment,
                                      std::size_t clusters);

/// One synchronous Euler step of the feature-average dynamics followed by
/// reassignment. Members of cluster k move toward their virtual neighbours'
/// estimates and integrate their own feature derivative; every other agent
/// relays cluster j by adding the mean increment its member neighbours made
/// in the previous step and diffusing toward all of its graph neighbours.
/// Throws std::invalid_argument on an agent-count mismatch or a
/// disconnected graph.
[[nodiscard]] EstimatorState step_feature_consensus(
    const EstimatorState& state, const CommGraph& g, const ClusterConfig& cfg,
    std::span<const double> xdot);

/// Same update structure for the auxiliary channel, using the feature-based
/// assignment. The indicator channel (input 1 for the own cluster, 0
/// otherwise) runs as plain average consensus over all agents.
[[nodiscard]] EstimatorState step_aux_consensus(const EstimatorState& state,
                                                const CommGraph& g,
                                                const ClusterConfig& cfg,
                                                std::span<const double> zdot);

struct ConvergenceReport {
  std::size_t iterations = 0;
  bool converged = false;
  /// Largest estimate change in the final iteration.
  double residual = 0.0;
};

struct ConsensusResult {
  EstimatorState state;
  ConvergenceReport report;
};

/// Feeds new inputs x, z into the estimator and iterates assignment plus both
/// consensus steps until the largest change drops below cfg.tol with an
/// unchanged assignment, or cfg.max_iter is reached.
[[nodiscard]] ConsensusResult run_until_converged(EstimatorState state,
                                                  const CommGraph& g,
                                                  const ClusterConfig& cfg,
                                                  std::span<const double> x,
                                                  std::span<const double> z);

/// In-place variant used by the engine's warm-started outer loop.
ConvergenceReport converge_in_place(EstimatorState& state, const CommGraph& g,
                                    const ClusterConfig& cfg,
                                    std::span<const double> x,
                                    std::span<const double> z);

struct AgentClusterResult {
  std::size_t cluster;
  std::vector<double> xbar;
  std::vector<double> zbar;
  /// zbar(j) * indicator(j) * n_total: mean times estimated cardinality.
  std::vector<double> totals;
};

/// Throws std::invalid_argument if n_total <= 0.
[[nodiscard]] std::vector<AgentClusterResult> cluster_results(
    const EstimatorState& state, double n_total);

}  // namespace lvbal

#endif  // LVBAL_CLUSTERING_HPP_
