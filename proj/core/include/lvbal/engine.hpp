#ifndef LVBAL_ENGINE_HPP_
#define LVBAL_ENGINE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lvbal/balancing.hpp"
#include "lvbal/clustering.hpp"
#include "lvbal/graph.hpp"
#include "lvbal/profiles.hpp"
#include "lvbal/scenario.hpp"
#include "lvbal/storage.hpp"
#include "lvbal/threephase.hpp"

namespace lvbal {

/// One household agent. `true_phase` is the physical connection and is only
/// used for the network metrics and validation counters; the control path
/// works from the measured angle.
struct Household {
  int id = 0;
  int bus = 0;
  Phase true_phase = Phase::a;
  double measured_angle_deg = 0.0;
  std::vector<double> load_kw;
  std::vector<double> pv_kw;
  BatteryParams battery{};
  BatteryState battery_state{};
  bool willing = true;
};

/// Resolves measured angles (seeded Gaussian noise around nominal unless the
/// scenario pins them) and attaches profiles. Throws DataError when a
/// household has no profile or a profile is shorter than the horizon.
[[nodiscard]] std::vector<Household> make_households(const Scenario& scenario,
                                                     const ProfileSet& profiles);

/// How a bus request was finally applied when batteries could not serve it.
enum class DispatchMode {
  full,     ///< no shortfall
  partial,  ///< every phase served as far as its batteries allow
  scaled,   ///< all phases scaled by the worst phase's served fraction
  hold,     ///< nothing applied; partial service would worsen unbalance
  disabled  ///< balancing switched off
};

[[nodiscard]] std::string_view to_string(DispatchMode m);

struct DispatchMember {
  /// Phase the agent believes it is on (from its cluster estimate).
  Phase phase = Phase::a;
  Eligibility eligibility{};
};

struct BusDispatch {
  BalancingDecision decision{};
  /// Per control phase, what the allocation serves.
  PhaseVector served{};
  /// Per control phase |decision.p_b - served|.
  PhaseVector shortfall{};
  /// Per member commanded power, kW.
  std::vector<double> allocation;
  DispatchMode mode = DispatchMode::full;
};

/// Per-bus control law: decide the battery powers from the estimated phase
/// exchange, split each phase across its eligible members and, when the
/// batteries fall short, pick among partial, uniformly scaled and no service
/// whichever gives the smallest estimated current unbalance factor (ties keep
/// the earlier option), so the estimated CUF never exceeds the pre-balancing
/// value.
[[nodiscard]] BusDispatch dispatch_bus(const PhaseVector& p_g_est,
                                       std::span<const DispatchMember> members,
                                       bool enabled, double vm);

/// Unbalance metrics for a per-phase grid exchange (kW, + = injection) at
/// unity power factor.
[[nodiscard]] UnbalanceMetrics exchange_metrics(const PhaseVector& p_g,
                                                double vm, Phasor z_n);

struct BusRecord {
  std::size_t step = 0;
  int bus = 0;
  std::size_t members = 0;
  ExchangeScenario scenario = ExchangeScenario::idle;
  DispatchMode mode = DispatchMode::full;
  PhaseVector pg_pre{};
  PhaseVector pg_est{};
  double p_ref = 0.0;
  PhaseVector pb_cmd{};
  PhaseVector pb_act{};
  PhaseVector pg_post{};
  PhaseVector shortfall{};
  double deficit = 0.0;
  double objective = 0.0;
  double in_pre = 0.0;
  double in_post = 0.0;
  /// NaN when undefined (zero positive-sequence current).
  double cuf_pre = 0.0;
  double cuf_post = 0.0;
  double ngv_pre = 0.0;
  double ngv_post = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double residual = 0.0;
  /// Largest cross-member difference of the phase-total estimates, kW.
  double disagreement = 0.0;
  std::size_t misassigned = 0;
  /// NaN unless verification is on.
  double verify_solver = 0.0;
  double verify_cluster = 0.0;
};

struct HouseholdRecord {
  std::size_t step = 0;
  int id = 0;
  int bus = 0;
  std::size_t cluster = 0;  ///< 1-based
  Phase control_phase = Phase::a;
  bool eligible = false;
  double command_kw = 0.0;
  double actual_kw = 0.0;
  double current_ref_a = 0.0;
  double soc = 0.0;
  double v_b = 0.0;
};

struct StepRecord {
  std::size_t step = 0;
  std::vector<BusRecord> buses;
  std::vector<HouseholdRecord> households;
};

struct RunOptions {
  /// Re-solve every Mixed decision with the brute-force oracle and compare
  /// every converged estimator with centralised sums and means.
  bool verify = false;
  double verify_tol = 1e-6;
};

struct RunSummary {
  std::size_t steps = 0;
  std::size_t buses = 0;
  std::size_t households = 0;
  double max_in_pre = 0.0;
  double max_in_post = 0.0;
  double mean_in_pre = 0.0;
  double mean_in_post = 0.0;
  double max_cuf_pre = 0.0;
  double max_cuf_post = 0.0;
  double max_ngv_pre = 0.0;
  double max_ngv_post = 0.0;
  double max_spread_post = 0.0;
  double throughput_kwh = 0.0;
  double deficit_kwh = 0.0;
  double clustering_accuracy = 1.0;
  double first_step_accuracy = 1.0;
  double min_step_accuracy = 1.0;
  std::size_t unconverged = 0;
  std::size_t total_iterations = 0;
  double max_disagreement = 0.0;
  double max_verify_solver = 0.0;
  double max_verify_cluster = 0.0;
  std::size_t verify_failures = 0;
};

/// Quasi-static feeder simulation. Buses are independent: each has its own
/// communication graph and estimator, warm-started across steps.
class Engine {
 public:
  /// Throws ConfigError on an invalid configuration or graph, DataError if a
  /// profile does not cover the horizon.
  Engine(SimConfig config, std::vector<Household> households,
         RunOptions options = {});

  /// Advances one outer step. Throws DataError once the horizon is exhausted.
  StepRecord step();

  [[nodiscard]] std::size_t next_step() const noexcept { return t_; }
  [[nodiscard]] const SimConfig& config() const noexcept { return config_; }
  [[nodiscard]] const std::vector<Household>& households() const noexcept {
    return households_;
  }

 private:
  struct Bus {
    int id = 0;
    std::vector<std::size_t> members;
    CommGraph graph;
    std::optional<EstimatorState> estimator;
  };

  BusRecord step_bus(Bus& bus, std::vector<HouseholdRecord>& out);

  SimConfig config_;
  RunOptions options_;
  std::vector<Household> households_;
  std::vector<Bus> buses_;
  std::size_t t_ = 0;
};

struct RunResult {
  RunSummary summary;
  std::vector<StepRecord> records;
};

/// Steps the engine over the full horizon.
[[nodiscard]] RunResult run(const SimConfig& config,
                            std::vector<Household> households,
                            RunOptions options = {});

/// Aggregates bus records; dt_h is the outer step in hours.
[[nodiscard]] RunSummary summarize(std::span<const BusRecord> buses,
                                   double dt_h, double verify_tol = 1e-6);

}  // namespace lvbal

#endif  // LVBAL_ENGINE_HPP_
