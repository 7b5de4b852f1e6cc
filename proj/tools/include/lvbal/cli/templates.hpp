#ifndef LVBAL_CLI_TEMPLATES_HPP_
#define LVBAL_CLI_TEMPLATES_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lvbal/profiles.hpp"
#include "lvbal/scenario.hpp"

namespace lvbal::cli {

struct Generated {
  Scenario scenario;
  ProfileSet profiles;
};

/// Names accepted by make_template, in display order.
[[nodiscard]] const std::vector<std::string>& template_names();

/// Builds a one-bus scenario with households split into equal phase blocks
/// and 24 h of 1-minute profiles.
///   nine-house          PV concentrated on phase a, mixed daily loads
///   balanced            identical load and PV on every household
///   single-phase-load   1 kW per phase-a household, nothing elsewhere
/// Throws ConfigError on an unknown name or fewer than 3 households.
[[nodiscard]] Generated make_template(std::string_view name,
                                      std::size_t households = 9,
                                      std::uint64_t seed = 7);

}  // namespace lvbal::cli

#endif  // LVBAL_CLI_TEMPLATES_HPP_
