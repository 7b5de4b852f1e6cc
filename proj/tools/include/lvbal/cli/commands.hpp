#ifndef LVBAL_CLI_COMMANDS_HPP_
#define LVBAL_CLI_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace lvbal::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kDataError = 3,
  kRuntimeError = 4,
};

struct RunArgs {
  std::filesystem::path config;
  /// Overrides the profiles path named in the scenario.
  std::optional<std::filesystem::path> profiles;
  std::filesystem::path output_dir = "out";
  std::optional<std::uint64_t> seed;
  bool no_balancing = false;
  bool emit_per_household = false;
  bool verify = false;
  double verify_tol = 1e-6;
};

/// Writes records.csv, summary.json and effective_config.toml (plus
/// households.csv on request) into the output directory.
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);

struct GenArgs {
  std::string template_name;
  std::size_t households = 9;
  std::uint64_t seed = 7;
  std::filesystem::path output_dir = ".";
};

/// Writes scenario.toml and profiles.csv.
int cmd_gen(const GenArgs& args, std::ostream& out, std::ostream& err);

int cmd_report(const std::filesystem::path& records, std::ostream& out,
               std::ostream& err);

}  // namespace lvbal::cli

#endif  // LVBAL_CLI_COMMANDS_HPP_
