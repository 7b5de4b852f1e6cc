#ifndef LVBAL_ORACLES_HPP_
#define LVBAL_ORACLES_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "lvbal/threephase.hpp"

// Slow, direct reference computations. They deliberately avoid the closed
// forms and consensus dynamics they are used to check.
namespace lvbal::oracle {

struct GridSearchResult {
  double r = 0.0;
  PhaseVector p_b{};
  double objective = 0.0;
  std::size_t feasible_points = 0;
};

/// Minimises sum |p_b| subject to the equal-exchange equalities and the
/// pairwise sign constraints by scanning the common final exchange r over
/// [min(p_g) - margin, max(p_g) + margin] in steps of `step`, plus the three
/// breakpoints p_g themselves. Each candidate is checked against the
/// constraints as written (equality residual, pairwise products >= 0).
[[nodiscard]] GridSearchResult brute_force_balancing(const PhaseVector& p_g,
                                                     double step = 1e-3,
                                                     double margin = 1.0);

/// Residual of the three equal-exchange equalities for a battery vector.
[[nodiscard]] double equality_residual(const PhaseVector& p_g,
                                       const PhaseVector& p_b);

/// Smallest pairwise product of battery powers (>= 0 when feasible).
[[nodiscard]] double min_pairwise_product(const PhaseVector& p_b);

/// Arithmetic mean of `values` over each label; NaN for empty clusters.
[[nodiscard]] std::vector<double> cluster_means(
    std::span<const double> values, std::span<const std::size_t> labels,
    std::size_t clusters);

/// Plain sum of `values` over each label.
[[nodiscard]] std::vector<double> cluster_sums(
    std::span<const double> values, std::span<const std::size_t> labels,
    std::size_t clusters);

}  // namespace lvbal::oracle

#endif  // LVBAL_ORACLES_HPP_
