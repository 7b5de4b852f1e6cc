#include "lvbal/records.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "lvbal/errors.hpp"

namespace lvbal {
namespace {

constexpr std::array<const char*, 3> kSuffix = {"a", "b", "c"};

std::string bus_header() {
  std::string h = "step,bus,members,scenario,mode";
  for (const char* name : {"pg_pre", "pg_est"}) {
    for (auto s : kSuffix) h += fmt::format(",{}_{}", name, s);
  }
  h += ",p_ref";
  for (const char* name : {"pb_cmd", "pb_act", "pg_post", "shortfall"}) {
    for (auto s : kSuffix) h += fmt::format(",{}_{}", name, s);
  }
  h +=
      ",deficit,objective,in_pre,in_post,cuf_pre_pct,cuf_post_pct,"
      "ngv_pre_v,ngv_post_v,iterations,converged,residual,disagreement,"
      "misassigned,verify_solver,verify_cluster";
  return h;
}

constexpr const char* kHouseholdHeader =
    "step,household_id,bus,cluster,control_phase,eligible,command_kw,"
    "actual_kw,current_ref_a,soc,v_b";

void put3(std::string& line, const PhaseVector& v) {
  for (double x : v) line += fmt::format(",{}", x);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_num(std::string_view s, const std::string& where) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw DataError(fmt::format("{}: bad number '{}'", where, s));
  }
  return v;
}

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& values,
             const std::string& where) {
  for (auto v : values) {
    if (to_string(v) == s) return v;
  }
  throw DataError(fmt::format("{}: unknown value '{}'", where, s));
}

}  // namespace

void write_bus_records(std::ostream& out, std::span<const StepRecord> steps,
                       double dt_outer_s) {
  fmt::print(out, "{} dt_outer_s={}\n{}\n", kBusRecordsTag, dt_outer_s,
             bus_header());
  std::string line;
  for (const auto& step : steps) {
    for (const auto& r : step.buses) {
      line = fmt::format("{},{},{},{},{}", r.step, r.bus, r.members,
                         to_string(r.scenario), to_string(r.mode));
      put3(line, r.pg_pre);
      put3(line, r.pg_est);
      line += fmt::format(",{}", r.p_ref);
      put3(line, r.pb_cmd);
      put3(line, r.pb_act);
      put3(line, r.pg_post);
      put3(line, r.shortfall);
      line += fmt::format(",{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                          r.deficit, r.objective, r.in_pre, r.in_post,
                          r.cuf_pre, r.cuf_post, r.ngv_pre, r.ngv_post,
                          r.iterations, r.converged ? 1 : 0, r.residual,
                          r.disagreement, r.misassigned, r.verify_solver,
                          r.verify_cluster);
      out << line;
    }
  }
}

void write_household_records(std::ostream& out,
                             std::span<const StepRecord> steps) {
  fmt::print(out, "{}\n{}\n", kHouseholdRecordsTag, kHouseholdHeader);
  for (const auto& step : steps) {
    for (const auto& h : step.households) {
      fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{}\n", h.step, h.id,
                 h.bus, h.cluster, phase_letter(h.control_phase),
                 h.eligible ? 1 : 0, h.command_kw, h.actual_kw,
                 h.current_ref_a, h.soc, h.v_b);
    }
  }
}

BusRecordTable read_bus_records(std::istream& in, const std::string& source) {
  BusRecordTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(fmt::format("{}: empty records file", source));
  }
  const std::string_view tag = kBusRecordsTag;
  const std::string_view first = line;
  const std::string_view key = " dt_outer_s=";
  if (first.substr(0, tag.size()) != tag ||
      first.substr(tag.size(), key.size()) != key) {
    throw DataError(fmt::format("{}: not an lvbal records file", source));
  }
  table.dt_outer_s =
      parse_num<double>(first.substr(tag.size() + key.size()), source + ":1");
  if (!(table.dt_outer_s > 0.0)) {
    throw DataError(fmt::format("{}: dt_outer_s must be positive", source));
  }
  if (!std::getline(in, line) || line != bus_header()) {
    throw DataError(fmt::format("{}:2: unexpected column header", source));
  }
  const auto n_cols = split(bus_header()).size();
  constexpr std::array kScenarios = {
      ExchangeScenario::all_inject, ExchangeScenario::all_consume,
      ExchangeScenario::mixed, ExchangeScenario::idle};
  constexpr std::array kModes = {DispatchMode::full, DispatchMode::partial,
                                 DispatchMode::scaled, DispatchMode::hold,
                                 DispatchMode::disabled};
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = fmt::format("{}:{}", source, line_no);
    const auto f = split(line);
    if (f.size() != n_cols) {
      throw DataError(fmt::format("{}: expected {} columns, got {}", where,
                                  n_cols, f.size()));
    }
    std::size_t c = 0;
    auto num = [&] { return parse_num<double>(f[c++], where); };
    auto three = [&] {
      PhaseVector v{};
      for (auto& x : v) x = num();
      return v;
    };
    BusRecord r;
    r.step = parse_num<std::size_t>(f[c++], where);
    r.bus = parse_num<int>(f[c++], where);
    r.members = parse_num<std::size_t>(f[c++], where);
    r.scenario = parse_enum(f[c++], kScenarios, where);
    r.mode = parse_enum(f[c++], kModes, where);
    r.pg_pre = three();
    r.pg_est = three();
    r.p_ref = num();
    r.pb_cmd = three();
    r.pb_act = three();
    r.pg_post = three();
    r.shortfall = three();
    r.deficit = num();
    r.objective = num();
    r.in_pre = num();
    r.in_post = num();
    r.cuf_pre = num();
    r.cuf_post = num();
    r.ngv_pre = num();
    r.ngv_post = num();
    r.iterations = parse_num<std::size_t>(f[c++], where);
    r.converged = parse_num<int>(f[c++], where) != 0;
    r.residual = num();
    r.disagreement = num();
    r.misassigned = parse_num<std::size_t>(f[c++], where);
    r.verify_solver = num();
    r.verify_cluster = num();
    table.rows.push_back(r);
  }
  if (table.rows.empty()) {
    throw DataError(fmt::format("{}: no records", source));
  }
  return table;
}

BusRecordTable load_bus_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(fmt::format("cannot open records file: {}", path.string()));
  }
  return read_bus_records(in, path.string());
}

std::string summary_to_json(const RunSummary& s) {
  nlohmann::ordered_json j;
  j["steps"] = s.steps;
  j["buses"] = s.buses;
  j["households"] = s.households;
  j["neutral_current_a"] = {{"max_pre", s.max_in_pre},
                            {"max_post", s.max_in_post},
                            {"mean_pre", s.mean_in_pre},
                            {"mean_post", s.mean_in_post}};
  j["cuf_pct"] = {{"max_pre", s.max_cuf_pre}, {"max_post", s.max_cuf_post}};
  j["ngv_v"] = {{"max_pre", s.max_ngv_pre}, {"max_post", s.max_ngv_post}};
  j["max_phase_spread_post_kw"] = s.max_spread_post;
  j["battery_throughput_kwh"] = s.throughput_kwh;
  j["deficit_kwh"] = s.deficit_kwh;
  j["clustering"] = {{"accuracy", s.clustering_accuracy},
                     {"first_step_accuracy", s.first_step_accuracy},
                     {"min_step_accuracy", s.min_step_accuracy},
                     {"unconverged_steps", s.unconverged},
                     {"total_iterations", s.total_iterations},
                     {"max_disagreement_kw", s.max_disagreement}};
  j["verify"] = {{"max_solver_diff", s.max_verify_solver},
                 {"max_cluster_diff", s.max_verify_cluster},
                 {"failures", s.verify_failures}};
  return j.dump(2) + "\n";
}

}  // namespace lvbal
