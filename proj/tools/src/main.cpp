#include <iostream>

#include <CLI11.hpp>

#include "lvbal/cli/commands.hpp"
#include "lvbal/cli/templates.hpp"

int main(int argc, char** argv) {
  using namespace lvbal::cli;

  CLI::App app{"lvbal: distributed phase balancing for LV feeders"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario");
  run_cmd->add_option("config", run.config, "scenario TOML")->required();
  run_cmd->add_option("--profiles", run.profiles, "profiles CSV (overrides the scenario)");
  run_cmd->add_option("-o,--output", run.output_dir, "output directory")
      ->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "seed override");
  run_cmd->add_flag("--no-balancing", run.no_balancing, "record metrics without dispatch");
  run_cmd->add_flag("--emit-per-household", run.emit_per_household,
                    "also write households.csv");
  run_cmd->add_flag("--verify", run.verify,
                    "cross-check every decision and estimate with brute-force oracles");
  run_cmd->add_option("--verify-tol", run.verify_tol, "largest accepted oracle difference")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a template scenario and profiles");
  gen_cmd->add_option("template", gen.template_name, "template name")->required();
  gen_cmd->add_option("-n,--households", gen.households, "household count")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("-o,--output", gen.output_dir, "output directory")
      ->capture_default_str();

  std::string records;
  auto* report_cmd = app.add_subcommand("report", "summarise a records file");
  report_cmd->add_option("records", records, "records.csv from a run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(kUsage);
  }

  if (*run_cmd) return cmd_run(run, std::cout, std::cerr);
  if (*gen_cmd) return cmd_gen(gen, std::cout, std::cerr);
  return cmd_report(records, std::cout, std::cerr);
}
