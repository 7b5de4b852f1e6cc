#include "lvbal/cli/commands.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "lvbal/cli/templates.hpp"
#include "lvbal/engine.hpp"
#include "lvbal/errors.hpp"
#include "lvbal/profiles.hpp"
#include "lvbal/records.hpp"
#include "lvbal/scenario.hpp"

namespace lvbal::cli {
namespace fs = std::filesystem;
namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error(
        fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  }
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const DataError& e) {
    fmt::print(err, "data error: {}\n", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kRuntimeError;
  }
}

void report_verify(const RunResult& result, double tol, std::ostream& err) {
  fmt::print(err, "verification failed on {} bus-steps (tolerance {}):\n",
             result.summary.verify_failures, tol);
  std::size_t shown = 0;
  for (const auto& step : result.records) {
    for (const auto& b : step.buses) {
      if (!(b.verify_solver > tol || b.verify_cluster > tol)) continue;
      if (shown++ == 20) {
        fmt::print(err, "  ...\n");
        return;
      }
      fmt::print(err, "  step {} bus {}: solver diff {:.3g}, cluster diff {:.3g}\n",
                 b.step, b.bus, b.verify_solver, b.verify_cluster);
    }
  }
}

}  // namespace

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto scenario = load_scenario(args.config);
    if (args.seed) scenario.config.seed = *args.seed;
    if (args.no_balancing) scenario.config.balancing = false;

    fs::path profiles_path;
    if (args.profiles) {
      profiles_path = *args.profiles;
    } else if (!scenario.profiles.empty()) {
      profiles_path = fs::path(scenario.profiles);
      if (profiles_path.is_relative()) {
        profiles_path = args.config.parent_path() / profiles_path;
      }
    } else {
      throw ConfigError("no profiles file given (scenario 'profiles' or --profiles)");
    }
    if (!fs::exists(profiles_path)) {
      throw DataError("cannot open profiles file: " + profiles_path.string());
    }
    const auto profiles = load_profiles(profiles_path, scenario.config.horizon);
    auto households = make_households(scenario, profiles);

    RunOptions options;
    options.verify = args.verify;
    options.verify_tol = args.verify_tol;
    const auto result = run(scenario.config, std::move(households), options);

    make_dir(args.output_dir);
    {
      auto f = open_out(args.output_dir / "records.csv");
      write_bus_records(f, result.records, scenario.config.dt_outer_s);
    }
    {
      auto f = open_out(args.output_dir / "summary.json");
      f << summary_to_json(result.summary);
    }
    {
      auto effective = scenario;
      effective.profiles = fs::absolute(profiles_path).lexically_normal().string();
      auto f = open_out(args.output_dir / "effective_config.toml");
      f << scenario_to_toml(effective);
    }
    if (args.emit_per_household) {
      auto f = open_out(args.output_dir / "households.csv");
      write_household_records(f, result.records);
    }

    const auto& s = result.summary;
    fmt::print(out,
               "{} steps, {} households: max |I_N| {:.3f} -> {:.3f} A, "
               "throughput {:.3f} kWh, deficit {:.3f} kWh\n",
               s.steps, s.households, s.max_in_pre, s.max_in_post,
               s.throughput_kwh, s.deficit_kwh);
    if (s.unconverged > 0) {
      fmt::print(err, "warning: clustering did not converge on {} bus-steps\n",
                 s.unconverged);
    }
    if (args.verify && s.verify_failures > 0) {
      report_verify(result, options.verify_tol, err);
      return static_cast<int>(kRuntimeError);
    }
    return static_cast<int>(kOk);
  });
}

int cmd_gen(const GenArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto g = make_template(args.template_name, args.households, args.seed);
    make_dir(args.output_dir);
    {
      auto f = open_out(args.output_dir / "scenario.toml");
      f << scenario_to_toml(g.scenario);
    }
    {
      auto f = open_out(args.output_dir / g.scenario.profiles);
      write_profiles(f, g.profiles);
    }
    fmt::print(out, "wrote {} and {}\n", (args.output_dir / "scenario.toml").string(),
               (args.output_dir / g.scenario.profiles).string());
    return static_cast<int>(kOk);
  });
}

int cmd_report(const fs::path& records, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto table = load_bus_records(records);
    const auto s = summarize(table.rows, table.dt_outer_s / 3600.0);
    fmt::print(out, "steps: {}  buses: {}  households: {}\n", s.steps, s.buses,
               s.households);
    fmt::print(out, "max |I_N| pre: {:.2f} A\n", s.max_in_pre);
    fmt::print(out, "max |I_N| post: {:.2f} A\n", s.max_in_post);
    fmt::print(out, "mean |I_N| pre: {:.2f} A\n", s.mean_in_pre);
    fmt::print(out, "mean |I_N| post: {:.2f} A\n", s.mean_in_post);
    fmt::print(out, "max CUF pre: {:.2f}%\n", s.max_cuf_pre);
    fmt::print(out, "max CUF post: {:.2f}%\n", s.max_cuf_post);
    fmt::print(out, "max NGV pre: {:.3f} V\n", s.max_ngv_pre);
    fmt::print(out, "max NGV post: {:.3f} V\n", s.max_ngv_post);
    fmt::print(out, "clustering accuracy: {:.2f}% (unconverged bus-steps: {})\n",
               100.0 * s.clustering_accuracy, s.unconverged);
    fmt::print(out, "battery throughput: {:.3f} kWh\n", s.throughput_kwh);
    fmt::print(out, "total deficit: {:.3f} kWh\n", s.deficit_kwh);
    return static_cast<int>(kOk);
  });
}

}  // namespace lvbal::cli
