#include "lvbal/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lvbal::oracle {

double equality_residual(const PhaseVector& p_g, const PhaseVector& p_b) {
  // [1 -1 0; 0 1 -1; -1 0 1] p_b + [ga - gb; gb - gc; gc - ga]
  const double r1 = p_b[0] - p_b[1] + (p_g[0] - p_g[1]);
  const double r2 = p_b[1] - p_b[2] + (p_g[1] - p_g[2]);
  const double r3 = -p_b[0] + p_b[2] + (p_g[2] - p_g[0]);
  return std::max({std::abs(r1), std::abs(r2), std::abs(r3)});
}

double min_pairwise_product(const PhaseVector& p_b) {
  return std::min({p_b[0] * p_b[1], p_b[1] * p_b[2], p_b[0] * p_b[2]});
}

GridSearchResult brute_force_balancing(const PhaseVector& p_g, double step,
                                       double margin) {
  if (!(step > 0.0)) throw std::invalid_argument("oracle: step must be > 0");
  const double lo = std::min({p_g[0], p_g[1], p_g[2]}) - margin;
  const double hi = std::max({p_g[0], p_g[1], p_g[2]}) + margin;

  GridSearchResult best;
  best.objective = std::numeric_limits<double>::infinity();
  auto consider = [&](double r) {
    const PhaseVector p_b{r - p_g[0], r - p_g[1], r - p_g[2]};
    if (equality_residual(p_g, p_b) > 1e-9) return;
    if (min_pairwise_product(p_b) < 0.0) return;
    ++best.feasible_points;
    const double obj = std::abs(p_b[0]) + std::abs(p_b[1]) + std::abs(p_b[2]);
    if (obj < best.objective) {
      best.objective = obj;
      best.r = r;
      best.p_b = p_b;
    }
  };
  const auto count = static_cast<long long>(std::floor((hi - lo) / step));
  for (long long k = 0; k <= count; ++k) {
    consider(lo + static_cast<double>(k) * step);
  }
  for (double breakpoint : p_g) consider(breakpoint);
  return best;
}

std::vector<double> cluster_sums(std::span<const double> values,
                                 std::span<const std::size_t> labels,
                                 std::size_t clusters) {
  std::vector<double> sums(clusters, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) sums.at(labels[i]) += values[i];
  return sums;
}

std::vector<double> cluster_means(std::span<const double> values,
                                  std::span<const std::size_t> labels,
                                  std::size_t clusters) {
  auto sums = cluster_sums(values, labels, clusters);
  std::vector<std::size_t> counts(clusters, 0);
  for (auto l : labels) ++counts.at(l);
  for (std::size_t j = 0; j < clusters; ++j) {
    sums[j] = counts[j] == 0 ? std::numeric_limits<double>::quiet_NaN()
                             : sums[j] / static_cast<double>(counts[j]);
  }
  return sums;
}

}  // namespace lvbal::oracle
