#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "generators.hpp"
#include "lvbal/clustering.hpp"
#include "reference.hpp"

using lvbal::ClusterConfig;
using lvbal::Metric;

namespace {

std::vector<double> nine_angles(std::uint64_t seed, double sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  const double nominal[3] = {0.0, -120.0, 120.0};
  std::vector<double> x;
  for (int i = 0; i < 9; ++i) x.push_back(nominal[i / 3] + noise(rng));
  return x;
}

const std::vector<std::size_t> kTruth = {0, 0, 0, 1, 1, 1, 2, 2, 2};

double own_estimate(const Eigen::MatrixXd& m, const lvbal::EstimatorState& s,
                    std::size_t i) {
  return m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s.assignment[i]));
}

}  // namespace

TEST_SUITE("clustering") {
  TEST_CASE("angle helpers") {
    CHECK(lvbal::wrap_degrees(180.0) == 180.0);
    CHECK(lvbal::wrap_degrees(-180.0) == 180.0);
    CHECK(lvbal::wrap_degrees(190.0) == doctest::Approx(-170.0));
    CHECK(lvbal::wrap_degrees(-540.0) == 180.0);
    CHECK(lvbal::feature_distance(-120.0, 120.0, Metric::circular) ==
          doctest::Approx(120.0));
    CHECK(lvbal::feature_distance(-120.0, 120.0, Metric::euclidean) == 240.0);
  }

  TEST_CASE("assign_cluster examples") {
    const std::vector<double> c1{1.0, -121.0, 119.0};
    CHECK(lvbal::assign_cluster(-118.0, c1, Metric::circular) == 1);
    // 10 degrees from both 170 and -170: the lower index wins.
    const std::vector<double> c2{170.0, -170.0, 0.0};
    CHECK(lvbal::assign_cluster(180.0, c2, Metric::circular) == 0);
    CHECK_THROWS_AS((void)lvbal::assign_cluster(0.0, {}, Metric::circular),
                    std::invalid_argument);
  }

  TEST_CASE("priors and random centroids") {
    CHECK(lvbal::nominal_phase_priors(3) == std::vector<double>{0.0, -120.0, 120.0});
    CHECK(lvbal::nominal_phase_priors(1) == std::vector<double>{0.0});
    const auto a = lvbal::random_centroids(4, 99);
    CHECK(a == lvbal::random_centroids(4, 99));
    CHECK(a != lvbal::random_centroids(4, 100));
    for (double c : a) {
      CHECK(c > -180.0);
      CHECK(c <= 180.0);
    }
  }

  TEST_CASE("config validation") {
    ClusterConfig c;
    CHECK_NOTHROW(c.validate());
    c.dt_inner = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.tol = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.max_iter = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.clusters = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }

  TEST_CASE("nine noisy angles split into the three phases") {
    const auto x = nine_angles(7, 2.0);
    const auto priors = lvbal::nominal_phase_priors(3);
    for (std::size_t i = 0; i < 9; ++i) {
      CHECK(lvbal::assign_cluster(x[i], priors, Metric::circular) == kTruth[i]);
    }
  }

  TEST_CASE("one Euler step between two members") {
    const std::vector<double> x{0.0, 2.0};
    const std::vector<double> z{0.0, 0.0};
    const std::vector<double> one{1.0};
    auto s = lvbal::init_estimator(x, z, one, Metric::euclidean);
    const std::vector<lvbal::Edge> e{{0, 1}};
    const auto g = lvbal::build_graph(2, e, 1.0);
    ClusterConfig cfg;
    cfg.clusters = 1;
    cfg.dt_inner = 0.1;
    const std::vector<double> still{0.0, 0.0};
    const auto next = lvbal::step_feature_consensus(s, g, cfg, still);
    CHECK(next.xbar(0, 0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(next.xbar(1, 0) == doctest::Approx(1.8).epsilon(1e-15));
  }

  TEST_CASE("disconnected graph is rejected") {
    const std::vector<double> x{0.0, 1.0};
    const std::vector<double> one{0.0};
    const auto s = lvbal::init_estimator(x, x, one, Metric::euclidean);
    const auto g = lvbal::build_graph(2, {}, 1.0);
    ClusterConfig cfg;
    cfg.clusters = 1;
    CHECK_THROWS_AS((void)lvbal::step_feature_consensus(s, g, cfg, x),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)lvbal::run_until_converged(s, g, cfg, x, x),
                    std::invalid_argument);
  }

  TEST_CASE("agent count mismatch is rejected") {
    const std::vector<double> x{0.0, 1.0};
    const std::vector<double> one{0.0};
    const auto s = lvbal::init_estimator(x, x, one, Metric::euclidean);
    ClusterConfig cfg;
    cfg.clusters = 1;
    CHECK_THROWS_AS((void)lvbal::step_aux_consensus(s, lvbal::ring_graph(3, 1.0),
                                                    cfg, x),
                    std::invalid_argument);
  }

  TEST_CASE("auxiliary average of a three-member cluster") {
    const std::vector<double> x{5.0, 5.0, 5.0};
    const std::vector<double> z{1.0, 2.0, 3.0};
    const std::vector<double> c{5.0};
    const auto s = lvbal::init_estimator(x, z, c, Metric::euclidean);
    ClusterConfig cfg;
    cfg.clusters = 1;
    const auto r = lvbal::run_until_converged(s, lvbal::path_graph(3, 1.0), cfg, x, z);
    REQUIRE(r.report.converged);
    for (Eigen::Index i = 0; i < 3; ++i) {
      CHECK(r.state.zbar(i, 0) == doctest::Approx(2.0).epsilon(1e-7));
      CHECK(r.state.indicator(i, 0) == doctest::Approx(1.0).epsilon(1e-7));
    }
  }

  TEST_CASE("a single-member cluster keeps its own input exactly") {
    // Agent 1 alone near +120 on a path of three.
    const std::vector<double> x{0.0, 120.0, 0.0};
    const std::vector<double> z{1.0, 4.25, 3.0};
    const std::vector<double> c{0.0, 120.0};
    const auto s = lvbal::init_estimator(x, z, c, Metric::circular);
    ClusterConfig cfg;
    cfg.clusters = 2;
    const auto r = lvbal::run_until_converged(s, lvbal::path_graph(3, 1.0), cfg, x, z);
    REQUIRE(r.report.converged);
    CHECK(r.state.assignment[1] == 1);
    CHECK(r.state.zbar(1, 1) == 4.25);
    CHECK(r.state.xbar(1, 1) == 120.0);
  }

  TEST_CASE("indicator channel estimates the cluster share") {
    const auto x = nine_angles(3, 2.0);
    std::vector<double> z(9, 0.0);
    const auto s = lvbal::init_estimator(x, z, lvbal::nominal_phase_priors(3),
                                         Metric::circular);
    const auto r = lvbal::run_until_converged(s, lvbal::ring_graph(9, 1.0),
                                              ClusterConfig{}, x, z);
    REQUIRE(r.report.converged);
    for (Eigen::Index i = 0; i < 9; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK(r.state.indicator(i, j) == doctest::Approx(3.0 / 9.0).epsilon(1e-7));
      }
    }
  }

  TEST_CASE("nine-agent ring at nominal angles converges to the true phases") {
    const std::vector<double> x{0, 0, 0, -120, -120, -120, 120, 120, 120};
    const std::vector<double> z{1, 2, 3, 4, 5, 6, 7, 8, 9};
    ClusterConfig cfg;
    cfg.tol = 1e-6;
    const auto s = lvbal::init_estimator(x, z, lvbal::nominal_phase_priors(3),
                                         Metric::circular);
    const auto r = lvbal::run_until_converged(s, lvbal::ring_graph(9, 1.0), cfg, x, z);
    CHECK(r.report.converged);
    // Centralised assignment on the true angles.
    for (std::size_t i = 0; i < 9; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < 3; ++j) {
        if (std::abs(lvbal::wrap_degrees(x[i] - lvbal::nominal_phase_priors(3)[j])) <
            std::abs(lvbal::wrap_degrees(x[i] - lvbal::nominal_phase_priors(3)[best]))) {
          best = j;
        }
      }
      CHECK(r.state.assignment[i] == best);
    }
  }

  TEST_CASE("iteration cap and fixed point") {
    const auto x = nine_angles(1, 2.0);
    std::vector<double> z{3, -1, 2, 0.5, 4, 1, -2, 0, 6};
    const auto g = lvbal::ring_graph(9, 1.0);
    auto s = lvbal::init_estimator(x, z, lvbal::nominal_phase_priors(3),
                                   Metric::circular);
    ClusterConfig capped;
    capped.max_iter = 1;
    const auto r1 = lvbal::run_until_converged(s, g, capped, x, z);
    CHECK_FALSE(r1.report.converged);
    CHECK(r1.report.iterations == 1);

    const auto full = lvbal::run_until_converged(s, g, ClusterConfig{}, x, z);
    REQUIRE(full.report.converged);
    const auto again = lvbal::run_until_converged(full.state, g, ClusterConfig{}, x, z);
    CHECK(again.report.converged);
    CHECK(again.report.iterations == 1);
  }

  TEST_CASE("member sums are conserved under static membership") {
    gen::Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 6 + static_cast<std::size_t>(trial % 10);
      const auto g = lvbal::build_graph(n, gen::connected_edges(rng, n, 0.2), 1.0);
      std::vector<double> x(n), z(n);
      std::vector<std::size_t> truth(n);
      const double nominal[3] = {0.0, -120.0, 120.0};
      for (std::size_t i = 0; i < n; ++i) {
        truth[i] = i % 3;
        x[i] = nominal[truth[i]] + gen::uniform(rng, -5, 5);
        z[i] = gen::uniform(rng, -5, 5);
      }
      auto s = lvbal::init_estimator(x, z, lvbal::nominal_phase_priors(3),
                                     Metric::circular);
      ClusterConfig cfg;
      cfg.dt_inner = 0.9 * lvbal::euler_step_bound(g, s.assignment, 3);
      const std::vector<double> still(n, 0.0);
      for (int step = 0; step < 50; ++step) {
        auto next = lvbal::step_aux_consensus(lvbal::step_feature_consensus(s, g, cfg, still),
                                              g, cfg, still);
        REQUIRE(next.assignment == s.assignment);
        for (std::size_t k = 0; k < 3; ++k) {
          double before_x = 0, after_x = 0, before_z = 0, after_z = 0;
          for (std::size_t i = 0; i < n; ++i) {
            if (s.assignment[i] != k) continue;
            const auto ii = static_cast<Eigen::Index>(i);
            const auto kk = static_cast<Eigen::Index>(k);
            before_x += s.xbar(ii, kk);
            after_x += next.xbar(ii, kk);
            before_z += s.zbar(ii, kk);
            after_z += next.zbar(ii, kk);
          }
          CHECK(std::abs(after_x - before_x) < 1e-9);
          CHECK(std::abs(after_z - before_z) < 1e-9);
        }
        s = std::move(next);
      }
    }
  }

  TEST_CASE("converged estimates match the centralised means on random graphs") {
    gen::Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 3 + static_cast<std::size_t>(trial % 15);
      const auto g = lvbal::build_graph(n, gen::connected_edges(rng, n, 0.25), 1.0);
      std::vector<double> x(n), z(n);
      std::vector<std::size_t> truth(n);
      const double nominal[3] = {0.0, -120.0, 120.0};
      for (std::size_t i = 0; i < n; ++i) {
        truth[i] = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
        x[i] = nominal[truth[i]] + gen::uniform(rng, -10, 10);
        z[i] = gen::uniform(rng, -8, 8);
      }
      ClusterConfig cfg;
      cfg.dt_inner = std::min(0.1, 0.9 * lvbal::euler_step_bound(g, truth, 3));
      cfg.max_iter = 200000;
      const auto s = lvbal::init_estimator(x, z, lvbal::nominal_phase_priors(3),
                                           Metric::circular);
      const auto r = lvbal::run_until_converged(s, g, cfg, x, z);
      REQUIRE(r.report.converged);
      REQUIRE(r.state.assignment == truth);
      const auto res = lvbal::cluster_results(r.state, static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) {
        const auto k = truth[i];
        CHECK(own_estimate(r.state.xbar, r.state, i) ==
              doctest::Approx(ref::group_mean(x, truth, k)).epsilon(1e-6));
        CHECK(std::abs(own_estimate(r.state.zbar, r.state, i) -
                       ref::group_mean(z, truth, k)) < 1e-6);
        for (std::size_t j = 0; j < 3; ++j) {
          double sum = 0.0;
          for (std::size_t l = 0; l < n; ++l) {
            if (truth[l] == j) sum += z[l];
          }
          CHECK(std::abs(res[i].totals[j] - sum) < 1e-6);
        }
      }
    }
  }

  TEST_CASE("warm start tracks changed auxiliary inputs") {
    const auto x = nine_angles(9, 2.0);
    std::vector<double> z{1, 1, 1, 2, 2, 2, 3, 3, 3};
    const auto g = lvbal::ring_graph(9, 1.0);
    auto s = lvbal::init_estimator(x, z, lvbal::nominal_phase_priors(3),
                                   Metric::circular);
    REQUIRE(lvbal::converge_in_place(s, g, ClusterConfig{}, x, z).converged);
    z = {0.5, -1, 2, 4, 4, 4, 0, 0, 9};
    REQUIRE(lvbal::converge_in_place(s, g, ClusterConfig{}, x, z).converged);
    const auto res = lvbal::cluster_results(s, 9.0);
    for (const auto& r : res) {
      CHECK(r.totals[0] == doctest::Approx(1.5).epsilon(1e-6));
      CHECK(r.totals[1] == doctest::Approx(12.0).epsilon(1e-6));
      CHECK(r.totals[2] == doctest::Approx(9.0).epsilon(1e-6));
    }
  }

  TEST_CASE("a household that moves cluster keeps the sums exact") {
    auto x = nine_angles(2, 2.0);
    std::vector<double> z{1, 2, 3, 4, 5, 6, 7, 8, 9};
    const auto g = lvbal::ring_graph(9, 1.0);
    auto s = lvbal::init_estimator(x, z, lvbal::nominal_phase_priors(3),
                                   Metric::circular);
    REQUIRE(lvbal::converge_in_place(s, g, ClusterConfig{}, x, z).converged);
    x[0] = -118.0;  // household 0 now looks like phase b
    REQUIRE(lvbal::converge_in_place(s, g, ClusterConfig{}, x, z).converged);
    CHECK(s.assignment[0] == 1);
    const auto res = lvbal::cluster_results(s, 9.0);
    CHECK(res[4].totals[0] == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(res[4].totals[1] == doctest::Approx(16.0).epsilon(1e-6));
    CHECK(res[4].totals[2] == doctest::Approx(24.0).epsilon(1e-6));
  }

  TEST_CASE("cluster totals") {
    lvbal::EstimatorState s;
    s.xbar = Eigen::MatrixXd::Zero(1, 2);
    s.zbar = Eigen::MatrixXd::Zero(1, 2);
    s.indicator = Eigen::MatrixXd::Zero(1, 2);
    s.zbar(0, 0) = 2.0;
    s.indicator(0, 0) = 3.0 / 9.0;
    s.zbar(0, 1) = 7.0;  // empty cluster: indicator 0
    s.x_feat = {0.0};
    s.z_aux = {0.0};
    s.assignment = {0};
    const auto r = lvbal::cluster_results(s, 9.0);
    CHECK(r[0].totals[0] == doctest::Approx(6.0));
    CHECK(r[0].totals[1] == 0.0);
    CHECK_THROWS_AS((void)lvbal::cluster_results(s, 0.0), std::invalid_argument);

    const auto x = nine_angles(5, 2.0);
    const std::vector<double> z{1, 1, 1, 2, 2, 2, 3, 3, 3};
    const auto c = lvbal::run_until_converged(
        lvbal::init_estimator(x, z, lvbal::nominal_phase_priors(3), Metric::circular),
        lvbal::ring_graph(9, 1.0), ClusterConfig{}, x, z);
    REQUIRE(c.report.converged);
    for (const auto& agent : lvbal::cluster_results(c.state, 9.0)) {
      CHECK(agent.totals[0] == doctest::Approx(3.0).epsilon(1e-7));
      CHECK(agent.totals[1] == doctest::Approx(6.0).epsilon(1e-7));
      CHECK(agent.totals[2] == doctest::Approx(9.0).epsilon(1e-7));
    }
  }

  TEST_CASE("reassignment is idempotent") {
    const auto x = nine_angles(8, 10.0);
    const auto priors = lvbal::nominal_phase_priors(3);
    for (double xi : x) {
      const auto k = lvbal::assign_cluster(xi, priors, Metric::circular);
      CHECK(lvbal::assign_cluster(xi, priors, Metric::circular) == k);
    }
  }

  TEST_CASE("estimates stay finite below the Euler bound") {
    gen::Rng rng(31);
    for (int trial = 0; trial < 15; ++trial) {
      const std::size_t n = 4 + static_cast<std::size_t>(trial);
      const auto g = lvbal::build_graph(n, gen::connected_edges(rng, n, 0.4), 1.5);
      std::vector<double> x(n), z(n);
      const double nominal[3] = {0.0, -120.0, 120.0};
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = nominal[i % 3] + gen::uniform(rng, -3, 3);
        z[i] = gen::uniform(rng, -5, 5);
      }
      auto s = lvbal::init_estimator(x, z, lvbal::nominal_phase_priors(3),
                                     Metric::circular);
      const double bound = lvbal::euler_step_bound(g, s.assignment, 3);
      for (double frac : {0.25, 0.5, 0.99}) {
        ClusterConfig cfg;
        cfg.dt_inner = frac * bound;
        cfg.max_iter = 3000;
        const auto r = lvbal::run_until_converged(s, g, cfg, x, z);
        CHECK(r.state.xbar.allFinite());
        CHECK(r.state.zbar.allFinite());
        CHECK(r.state.zbar.cwiseAbs().maxCoeff() < 1e3);
      }
    }
  }
}
