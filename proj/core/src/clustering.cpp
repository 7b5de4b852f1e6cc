#include "lvbal/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>

namespace lvbal {
namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void require_compatible(const EstimatorState& s, const CommGraph& g) {
  if (s.agents() != g.size()) {
    throw std::invalid_argument(
        "clustering: estimator has " + std::to_string(s.agents()) +
        " agents but graph has " + std::to_string(g.size()));
  }
  if (!is_connected(g)) {
    throw std::invalid_argument(
        "clustering: consensus requires a connected communication graph");
  }
}

void require_length(std::span<const double> v, std::size_t n,
                    const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string("clustering: ") + what +
                                " has wrong length");
  }
}

std::vector<double> row(const Eigen::MatrixXd& m, std::size_t i) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Index j = 0; j < m.cols(); ++j) {
    out[static_cast<std::size_t>(j)] = m(idx(i), j);
  }
  return out;
}

// First member of `cluster` (other than `from`) reached by breadth-first
// search from `from`, expanding only through non-members.
std::size_t nearest_member(const CommGraph& g,
                           std::span<const std::size_t> assignment,
                           std::size_t cluster, std::size_t from) {
  std::vector<bool> seen(g.size(), false);
  std::queue<std::size_t> frontier;
  frontier.push(from);
  seen[from] = true;
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (auto v : g.neighbors(u)) {
      if (seen[v]) continue;
      seen[v] = true;
      if (assignment[v] == cluster) return v;
      frontier.push(v);
    }
  }
  return g.size();
}

// Moves estimates from `before` to `after` membership without breaking the
// member-sum invariant: joiners restart from their own input, leavers hand
// the part of their estimate not backed by their input to the nearest
// remaining member.
void reconcile_membership(Eigen::MatrixXd& est, std::span<const double> input,
                          std::span<const std::size_t> before,
                          std::span<const std::size_t> after,
                          const CommGraph& g) {
  for (std::size_t i = 0; i < after.size(); ++i) {
    if (before[i] != after[i]) est(idx(i), idx(after[i])) = input[i];
  }
  for (std::size_t i = 0; i < after.size(); ++i) {
    if (before[i] == after[i]) continue;
    const auto old = before[i];
    const auto target = nearest_member(g, after, old, i);
    if (target < g.size()) {
      est(idx(target), idx(old)) += est(idx(i), idx(old)) - input[i];
    }
  }
}

std::vector<std::size_t> nearest_clusters(const EstimatorState& s,
                                          Metric metric) {
  std::vector<std::size_t> labels(s.agents());
  std::vector<double> centroids(s.clusters());
  for (std::size_t i = 0; i < s.agents(); ++i) {
    for (std::size_t j = 0; j < s.clusters(); ++j) {
      centroids[j] = s.xbar(idx(i), idx(j));
    }
    labels[i] = assign_cluster(s.x_feat[i], centroids, metric);
  }
  return labels;
}

// Reassign until labels are stable. Hand-offs can move a neighbour's own
// estimate, so one pass is not always enough.
void reassign(EstimatorState& s, const CommGraph& g, Metric metric) {
  for (std::size_t round = 0; round <= s.agents(); ++round) {
    auto labels = nearest_clusters(s, metric);
    if (labels == s.assignment) return;
    reconcile_membership(s.xbar, s.x_feat, s.assignment, labels, g);
    s.assignment = std::move(labels);
  }
}

// Shared update for the feature and auxiliary channels.
void diffuse(Eigen::MatrixXd& est, Eigen::MatrixXd& prev_delta,
             std::span<const std::size_t> assignment,
             std::span<const double> drift, const CommGraph& g,
             const ClusterLinks& links, double dt) {
  const Eigen::MatrixXd snap = est;
  const double alpha = g.alpha();
  const auto m = static_cast<std::size_t>(est.cols());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto nb = g.neighbors(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double own = snap(idx(i), idx(j));
      double change = 0.0;
      if (assignment[i] == j) {
        double coupling = 0.0;
        for (auto l : links.of(j, i)) coupling += snap(idx(l), idx(j)) - own;
        change = dt * drift[i] + dt * alpha * coupling;
      } else {
        double relayed = 0.0;
        double coupling = 0.0;
        for (auto l : nb) {
          if (assignment[l] == j) relayed += prev_delta(idx(l), idx(j));
          coupling += snap(idx(l), idx(j)) - own;
        }
        if (!nb.empty()) relayed /= static_cast<double>(nb.size());
        change = relayed + dt * alpha * coupling;
      }
      est(idx(i), idx(j)) = own + change;
    }
  }
}

void advance_features(EstimatorState& s, const CommGraph& g,
                      const ClusterConfig& cfg, std::span<const double> xdot,
                      const ClusterLinks& links) {
  const Eigen::MatrixXd before = s.xbar;
  diffuse(s.xbar, s.prev_dx, s.assignment, xdot, g, links, cfg.dt_inner);
  for (std::size_t i = 0; i < s.agents(); ++i) {
    s.x_feat[i] += cfg.dt_inner * xdot[i];
  }
  reassign(s, g, cfg.metric);
  s.prev_dx = s.xbar - before;
}

void advance_aux(EstimatorState& s, const CommGraph& g,
                 const ClusterConfig& cfg, std::span<const double> zdot,
                 const ClusterLinks& links) {
  const Eigen::MatrixXd before = s.zbar;
  reconcile_membership(s.zbar, s.z_aux, s.aux_assignment, s.assignment, g);
  diffuse(s.zbar, s.prev_dz, s.assignment, zdot, g, links, cfg.dt_inner);
  for (std::size_t i = 0; i < s.agents(); ++i) {
    s.z_aux[i] += cfg.dt_inner * zdot[i];
  }
  s.prev_dz = s.zbar - before;

  // Indicator channel: every agent holds an input for every cluster, so this
  // is average consensus over the whole graph with the membership change
  // injected as drift.
  const Eigen::MatrixXd snap = s.indicator;
  const double k = cfg.dt_inner * g.alpha();
  for (std::size_t i = 0; i < s.agents(); ++i) {
    for (std::size_t j = 0; j < s.clusters(); ++j) {
      const double own = snap(idx(i), idx(j));
      double coupling = 0.0;
      for (auto l : g.neighbors(i)) coupling += snap(idx(l), idx(j)) - own;
      const double was = s.aux_assignment[i] == j ? 1.0 : 0.0;
      const double now = s.assignment[i] == j ? 1.0 : 0.0;
      s.indicator(idx(i), idx(j)) = own + (now - was) + k * coupling;
    }
  }
  s.prev_dind = s.indicator - snap;
  s.aux_assignment = s.assignment;
}

double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

void require_finite(std::span<const double> v, const char* what) {
  for (double d : v) {
    if (!std::isfinite(d)) {
      throw std::invalid_argument(std::string("clustering: non-finite ") +
                                  what);
    }
  }
}

}  // namespace

void ClusterConfig::validate() const {
  if (clusters < 1) throw std::invalid_argument("clustering: m must be >= 1");
  if (!(dt_inner > 0.0)) {
    throw std::invalid_argument("clustering: dt_inner must be > 0");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("clustering: tol must be > 0");
  if (max_iter < 1) {
    throw std::invalid_argument("clustering: max_iter must be >= 1");
  }
}

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

double feature_distance(double a, double b, Metric metric) {
  if (metric == Metric::circular) return std::abs(wrap_degrees(a - b));
  return std::abs(a - b);
}

std::size_t assign_cluster(double x, std::span<const double> centroids,
                           Metric metric) {
  if (centroids.empty()) {
    throw std::invalid_argument("clustering: empty centroid estimate vector");
  }
  std::size_t best = 0;
  double best_dist = feature_distance(x, centroids[0], metric);
  for (std::size_t j = 1; j < centroids.size(); ++j) {
    const double d = feature_distance(x, centroids[j], metric);
    if (d < best_dist) {
      best = j;
      best_dist = d;
    }
  }
  return best;
}

std::vector<double> nominal_phase_priors(std::size_t clusters) {
  std::vector<double> priors(clusters);
  for (std::size_t j = 0; j < clusters; ++j) {
    priors[j] = wrap_degrees(-360.0 * static_cast<double>(j) /
                             static_cast<double>(clusters));
  }
  // Three-phase layout: a = 0, b = -120, c = +120.
  if (clusters == 3) priors = {0.0, -120.0, 120.0};
  return priors;
}

std::vector<double> random_centroids(std::size_t clusters,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(clusters);
  for (auto& c : out) {
    // 53-bit draw in [0, 1), mapped into (-180, 180].
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    c = 180.0 - 360.0 * u;
  }
  return out;
}

EstimatorState init_estimator(std::span<const double> features,
                              std::span<const double> aux,
                              std::span<const double> centroids,
                              Metric metric) {
  if (centroids.empty()) {
    throw std::invalid_argument("clustering: need at least one centroid");
  }
  require_length(aux, features.size(), "auxiliary input");
  require_finite(features, "feature input");
  require_finite(aux, "auxiliary input");
  const auto n = idx(features.size());
  const auto m = idx(centroids.size());

  EstimatorState s;
  s.xbar.resize(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) s.xbar(i, j) = centroids[j];
  }
  s.zbar = Eigen::MatrixXd::Zero(n, m);
  s.indicator = Eigen::MatrixXd::Zero(n, m);
  s.prev_dx = Eigen::MatrixXd::Zero(n, m);
  s.prev_dz = Eigen::MatrixXd::Zero(n, m);
  s.prev_dind = Eigen::MatrixXd::Zero(n, m);
  s.x_feat.assign(features.begin(), features.end());
  s.z_aux.assign(aux.begin(), aux.end());
  s.assignment.resize(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto k = assign_cluster(features[i], centroids, metric);
    s.assignment[i] = k;
    s.xbar(idx(i), idx(k)) = features[i];
    s.zbar(idx(i), idx(k)) = aux[i];
    s.indicator(idx(i), idx(k)) = 1.0;
  }
  s.aux_assignment = s.assignment;
  return s;
}

ClusterLinks::ClusterLinks(const CommGraph& g,
                           std::span<const std::size_t> assignment,
                           std::size_t clusters)
    : links_(clusters, std::vector<std::vector<std::size_t>>(g.size())) {
  std::vector<char> seen(g.size());
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto k = assignment[i];
    if (k >= clusters) continue;
    std::fill(seen.begin(), seen.end(), 0);
    seen[i] = 1;
    stack.assign(1, i);
    auto& out = links_[k][i];
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (auto v : g.neighbors(u)) {
        if (seen[v]) continue;
        seen[v] = 1;
        if (assignment[v] == k) {
          out.push_back(v);
        } else {
          stack.push_back(v);
        }
      }
    }
    std::sort(out.begin(), out.end());
    max_degree_ = std::max(max_degree_, out.size());
  }
}

double euler_step_bound(const CommGraph& g,
                        std::span<const std::size_t> assignment,
                        std::size_t clusters) {
  const ClusterLinks links(g, assignment, clusters);
  const auto d = std::max(g.max_degree(), links.max_degree());
  if (d == 0) return std::numeric_limits<double>::infinity();
  return 1.0 / (g.alpha() * static_cast<double>(d));
}

EstimatorState step_feature_consensus(const EstimatorState& state,
                                      const CommGraph& g,
                                      const ClusterConfig& cfg,
                                      std::span<const double> xdot) {
  cfg.validate();
  require_compatible(state, g);
  require_length(xdot, state.agents(), "feature derivative");
  EstimatorState next = state;
  const ClusterLinks links(g, next.assignment, next.clusters());
  advance_features(next, g, cfg, xdot, links);
  return next;
}

EstimatorState step_aux_consensus(const EstimatorState& state,
                                  const CommGraph& g, const ClusterConfig& cfg,
                                  std::span<const double> zdot) {
  cfg.validate();
  require_compatible(state, g);
  require_length(zdot, state.agents(), "auxiliary derivative");
  EstimatorState next = state;
  const ClusterLinks links(g, next.assignment, next.clusters());
  advance_aux(next, g, cfg, zdot, links);
  return next;
}

ConvergenceReport converge_in_place(EstimatorState& s, const CommGraph& g,
                                    const ClusterConfig& cfg,
                                    std::span<const double> x,
                                    std::span<const double> z) {
  cfg.validate();
  require_compatible(s, g);
  require_length(x, s.agents(), "feature input");
  require_length(z, s.agents(), "auxiliary input");
  require_finite(x, "feature input");
  require_finite(z, "auxiliary input");

  const auto n = s.agents();
  std::vector<double> xdot(n), zdot(n);
  for (std::size_t i = 0; i < n; ++i) {
    xdot[i] = (x[i] - s.x_feat[i]) / cfg.dt_inner;
    zdot[i] = (z[i] - s.z_aux[i]) / cfg.dt_inner;
  }
  const std::vector<double> still(n, 0.0);

  reassign(s, g, cfg.metric);
  ClusterLinks links(g, s.assignment, s.clusters());
  auto links_for = s.assignment;

  ConvergenceReport report;
  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    const bool first = it == 1;
    const auto labels_before = s.assignment;
    advance_features(s, g, cfg, first ? xdot : still, links);
    if (s.assignment != links_for) {
      links = ClusterLinks(g, s.assignment, s.clusters());
      links_for = s.assignment;
    }
    advance_aux(s, g, cfg, first ? zdot : still, links);
    if (first) {
      // Land exactly on the new inputs instead of x_old + dt * (x - x_old)/dt.
      s.x_feat.assign(x.begin(), x.end());
      s.z_aux.assign(z.begin(), z.end());
    }

    report.iterations = it;
    report.residual = std::max(
        {max_abs(s.prev_dx), max_abs(s.prev_dz), max_abs(s.prev_dind)});
    if (!std::isfinite(report.residual)) break;
    if (report.residual < cfg.tol && s.assignment == labels_before) {
      report.converged = true;
      break;
    }
  }
  return report;
}

ConsensusResult run_until_converged(EstimatorState state, const CommGraph& g,
                                    const ClusterConfig& cfg,
                                    std::span<const double> x,
                                    std::span<const double> z) {
  const auto report = converge_in_place(state, g, cfg, x, z);
  return ConsensusResult{std::move(state), report};
}

std::vector<AgentClusterResult> cluster_results(const EstimatorState& state,
                                                double n_total) {
  if (!(n_total > 0.0)) {
    throw std::invalid_argument("clustering: n_total must be > 0");
  }
  std::vector<AgentClusterResult> out;
  out.reserve(state.agents());
  for (std::size_t i = 0; i < state.agents(); ++i) {
    AgentClusterResult r{state.assignment[i], row(state.xbar, i),
                         row(state.zbar, i), {}};
    r.totals.resize(state.clusters());
    for (std::size_t j = 0; j < state.clusters(); ++j) {
      r.totals[j] =
          state.zbar(idx(i), idx(j)) * state.indicator(idx(i), idx(j)) *
          n_total;
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace lvbal
