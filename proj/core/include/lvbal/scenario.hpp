#ifndef LVBAL_SCENARIO_HPP_
#define LVBAL_SCENARIO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lvbal/clustering.hpp"
#include "lvbal/graph.hpp"
#include "lvbal/storage.hpp"
#include "lvbal/threephase.hpp"

namespace lvbal {

enum class Topology { ring, path, full, explicit_edges };
enum class CentroidInit { priors, random };

/// Per-bus communication topology. Edge indices are local to a bus, in the
/// order households of that bus appear in the scenario.
struct GraphSpec {
  Topology topology = Topology::ring;
  double alpha = 1.0;
  std::vector<Edge> edges;
};

struct SimConfig {
  double dt_outer_s = 60.0;
  std::size_t horizon = 1440;
  /// Nominal RMS phase voltage, V.
  double vm = 230.0;
  /// Neutral impedance behind the NGV proxy, ohm.
  Phasor z_n{0.05, 0.0};
  ClusterConfig clustering{};
  CentroidInit init = CentroidInit::priors;
  GraphSpec graph{};
  std::uint64_t seed = 7;
  bool balancing = true;
  /// Standard deviation of the measured phase angle around nominal, degrees.
  double angle_noise_deg = 2.0;

  [[nodiscard]] double dt_hours() const noexcept { return dt_outer_s / 3600.0; }
  /// Throws ConfigError.
  void validate() const;
};

struct HouseholdSpec {
  int id = 0;
  int bus = 0;
  Phase phase = Phase::a;
  bool willing = true;
  double initial_soc = 0.5;
  BatteryParams battery{};
  /// Overrides the seeded nominal-plus-noise draw when set.
  std::optional<double> measured_angle_deg;
};

struct Scenario {
  SimConfig config;
  std::vector<HouseholdSpec> households;
  /// Profiles CSV referenced by the scenario; relative to the scenario file.
  std::string profiles;
};

/// Throws ConfigError on a syntax error, unknown enum value, out-of-range
/// parameter or inconsistent household list.
[[nodiscard]] Scenario parse_scenario(std::string_view toml_text,
                                      const std::string& source = "<string>");
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// Serialises a scenario with every default spelled out. Parsing the result
/// yields the same scenario.
[[nodiscard]] std::string scenario_to_toml(const Scenario& scenario);

/// Builds the communication graph for a bus with n households.
/// Throws ConfigError if the result is invalid or disconnected.
[[nodiscard]] CommGraph make_bus_graph(const GraphSpec& spec, std::size_t n);

[[nodiscard]] std::string_view to_string(Topology t);
[[nodiscard]] std::string_view to_string(Metric m);
[[nodiscard]] std::string_view to_string(CentroidInit i);

}  // namespace lvbal

#endif  // LVBAL_SCENARIO_HPP_
