#include "lvbal/scenario.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <span>
#include <sstream>

#include <fmt/format.h>
#include <toml.hpp>

#include "lvbal/errors.hpp"

namespace lvbal {
namespace {

[[noreturn]] void config_fail(const std::string& source,
                              const std::string& why) {
  throw ConfigError(source + ": " + why);
}

void reject_unknown(const toml::table& t, std::span<const std::string_view> allowed,
                    const std::string& where, const std::string& source) {
  for (const auto& [key, node] : t) {
    const auto k = key.str();
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      config_fail(source, fmt::format("unknown key '{}' in {}", k, where));
    }
  }
}

void reject_unknown(const toml::table& t, std::initializer_list<std::string_view> allowed,
                    const std::string& where, const std::string& source) {
  reject_unknown(t, std::span(allowed.begin(), allowed.size()), where, source);
}

template <typename T>
void read(const toml::table& t, std::string_view key, T& out,
          const std::string& where, const std::string& source) {
  const auto node = t[key];
  if (!node) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node.value_exact<bool>()) {
      out = *v;
      return;
    }
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = node.value_exact<std::string>()) {
      out = *v;
      return;
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (node.is_number()) {
      out = *node.value<double>();
      return;
    }
  } else {
    if (auto v = node.value_exact<std::int64_t>()) {
      if constexpr (std::is_unsigned_v<T>) {
        if (*v < 0) config_fail(source, fmt::format("{}.{} must be >= 0", where, key));
      }
      out = static_cast<T>(*v);
      return;
    }
  }
  config_fail(source, fmt::format("{}.{} has the wrong type", where, key));
}

Topology parse_topology(const std::string& s, const std::string& source) {
  if (s == "ring") return Topology::ring;
  if (s == "path") return Topology::path;
  if (s == "full") return Topology::full;
  if (s == "explicit") return Topology::explicit_edges;
  config_fail(source, "graph.topology must be one of ring, path, full, explicit");
}

Metric parse_metric(const std::string& s, const std::string& source) {
  if (s == "circular") return Metric::circular;
  if (s == "euclidean") return Metric::euclidean;
  config_fail(source, "clustering.metric must be circular or euclidean");
}

CentroidInit parse_init(const std::string& s, const std::string& source) {
  if (s == "priors") return CentroidInit::priors;
  if (s == "random") return CentroidInit::random;
  config_fail(source, "clustering.init must be priors or random");
}

Phase parse_phase(const std::string& s, const std::string& source) {
  if (s == "a") return Phase::a;
  if (s == "b") return Phase::b;
  if (s == "c") return Phase::c;
  config_fail(source, "household.phase must be a, b or c");
}

constexpr std::array<std::string_view, 12> kBatteryKeys = {
    "e_cap_kwh",     "v_min",   "v_max",   "p_max_charge_kw", "p_max_discharge_kw",
    "soc_min",       "soc_max", "soc_low_part", "soc_high_part", "eta_c",
    "eta_d",         "initial_soc"};

void read_battery(const toml::table& t, BatteryParams& p, double& initial_soc,
                  const std::string& where, const std::string& source) {
  reject_unknown(t, kBatteryKeys, where, source);
  read(t, "e_cap_kwh", p.e_cap, where, source);
  read(t, "v_min", p.v_min, where, source);
  read(t, "v_max", p.v_max, where, source);
  read(t, "p_max_charge_kw", p.p_max_charge, where, source);
  read(t, "p_max_discharge_kw", p.p_max_discharge, where, source);
  read(t, "soc_min", p.soc_min, where, source);
  read(t, "soc_max", p.soc_max, where, source);
  read(t, "soc_low_part", p.soc_low_part, where, source);
  read(t, "soc_high_part", p.soc_high_part, where, source);
  read(t, "eta_c", p.eta_c, where, source);
  read(t, "eta_d", p.eta_d, where, source);
  read(t, "initial_soc", initial_soc, where, source);
}

const toml::table* sub_table(const toml::table& root, std::string_view key,
                             const std::string& source) {
  const auto node = root[key];
  if (!node) return nullptr;
  if (!node.is_table()) config_fail(source, fmt::format("'{}' must be a table", key));
  return node.as_table();
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void write_battery(std::ostream& out, const BatteryParams& p, double soc) {
  out << fmt::format("e_cap_kwh = {}\n", p.e_cap)
      << fmt::format("v_min = {}\n", p.v_min)
      << fmt::format("v_max = {}\n", p.v_max)
      << fmt::format("p_max_charge_kw = {}\n", p.p_max_charge)
      << fmt::format("p_max_discharge_kw = {}\n", p.p_max_discharge)
      << fmt::format("soc_min = {}\n", p.soc_min)
      << fmt::format("soc_max = {}\n", p.soc_max)
      << fmt::format("soc_low_part = {}\n", p.soc_low_part)
      << fmt::format("soc_high_part = {}\n", p.soc_high_part)
      << fmt::format("eta_c = {}\n", p.eta_c)
      << fmt::format("eta_d = {}\n", p.eta_d)
      << fmt::format("initial_soc = {}\n", soc);
}

// fmt prints integral doubles without a fraction ("60"); TOML would read that
// back as an integer, which the reader accepts for float fields anyway.
std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::ring:
      return "ring";
    case Topology::path:
      return "path";
    case Topology::full:
      return "full";
    case Topology::explicit_edges:
      return "explicit";
  }
  return "?";
}

std::string_view to_string(Metric m) {
  return m == Metric::circular ? "circular" : "euclidean";
}

std::string_view to_string(CentroidInit i) {
  return i == CentroidInit::priors ? "priors" : "random";
}

void SimConfig::validate() const {
  auto fail = [](const std::string& why) { throw ConfigError(why); };
  if (!(dt_outer_s > 0.0)) fail("simulation.dt_outer_s must be > 0");
  if (horizon < 1) fail("simulation.horizon must be >= 1");
  if (!(vm > 0.0)) fail("simulation.vm must be > 0");
  if (!std::isfinite(z_n.real()) || !std::isfinite(z_n.imag())) {
    fail("simulation.z_n must be finite");
  }
  if (!(angle_noise_deg >= 0.0)) fail("simulation.angle_noise_deg must be >= 0");
  if (!(graph.alpha > 0.0)) fail("graph.alpha must be > 0");
  try {
    clustering.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

CommGraph make_bus_graph(const GraphSpec& spec, std::size_t n) {
  try {
    auto g = [&] {
      switch (spec.topology) {
        case Topology::ring:
          return ring_graph(n, spec.alpha);
        case Topology::path:
          return path_graph(n, spec.alpha);
        case Topology::full:
          return complete_graph(n, spec.alpha);
        case Topology::explicit_edges:
          break;
      }
      return build_graph(n, spec.edges, spec.alpha);
    }();
    if (!is_connected(g)) {
      throw ConfigError(fmt::format(
          "communication graph over {} households is not connected", n));
    }
    return g;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
}

Scenario parse_scenario(std::string_view toml_text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " (" << e.source().begin << ")";
    config_fail(source, msg.str());
  }

  reject_unknown(root,
                 {"profiles", "simulation", "clustering", "graph", "battery",
                  "household"},
                 "top level", source);
  Scenario sc;
  read(root, "profiles", sc.profiles, "top level", source);
  auto& cfg = sc.config;

  if (const auto* t = sub_table(root, "simulation", source)) {
    reject_unknown(*t,
                   {"dt_outer_s", "horizon", "vm", "z_n", "seed", "balancing",
                    "angle_noise_deg"},
                   "[simulation]", source);
    read(*t, "dt_outer_s", cfg.dt_outer_s, "simulation", source);
    read(*t, "horizon", cfg.horizon, "simulation", source);
    read(*t, "vm", cfg.vm, "simulation", source);
    read(*t, "seed", cfg.seed, "simulation", source);
    read(*t, "balancing", cfg.balancing, "simulation", source);
    read(*t, "angle_noise_deg", cfg.angle_noise_deg, "simulation", source);
    if (const auto zn = (*t)["z_n"]) {
      const auto* arr = zn.as_array();
      if (arr == nullptr || arr->size() != 2 || !(*arr)[0].is_number() ||
          !(*arr)[1].is_number()) {
        config_fail(source, "simulation.z_n must be [re, im] in ohm");
      }
      cfg.z_n = {*(*arr)[0].value<double>(), *(*arr)[1].value<double>()};
    }
  }

  if (const auto* t = sub_table(root, "clustering", source)) {
    reject_unknown(*t,
                   {"clusters", "dt_inner", "tol", "max_iter", "metric", "init"},
                   "[clustering]", source);
    auto& cc = cfg.clustering;
    read(*t, "clusters", cc.clusters, "clustering", source);
    read(*t, "dt_inner", cc.dt_inner, "clustering", source);
    read(*t, "tol", cc.tol, "clustering", source);
    read(*t, "max_iter", cc.max_iter, "clustering", source);
    std::string metric{to_string(cc.metric)};
    read(*t, "metric", metric, "clustering", source);
    cc.metric = parse_metric(metric, source);
    std::string init{to_string(cfg.init)};
    read(*t, "init", init, "clustering", source);
    cfg.init = parse_init(init, source);
  }

  if (const auto* t = sub_table(root, "graph", source)) {
    reject_unknown(*t, {"topology", "alpha", "edges"}, "[graph]", source);
    std::string topo{to_string(cfg.graph.topology)};
    read(*t, "topology", topo, "graph", source);
    cfg.graph.topology = parse_topology(topo, source);
    read(*t, "alpha", cfg.graph.alpha, "graph", source);
    if (const auto edges = (*t)["edges"]) {
      const auto* arr = edges.as_array();
      if (arr == nullptr) config_fail(source, "graph.edges must be an array of pairs");
      for (const auto& e : *arr) {
        const auto* pair = e.as_array();
        if (pair == nullptr || pair->size() != 2) {
          config_fail(source, "graph.edges entries must be [u, v] pairs");
        }
        const auto u = (*pair)[0].value_exact<std::int64_t>();
        const auto v = (*pair)[1].value_exact<std::int64_t>();
        if (!u || !v || *u < 0 || *v < 0) {
          config_fail(source, "graph.edges indices must be non-negative integers");
        }
        cfg.graph.edges.push_back(
            {static_cast<std::size_t>(*u), static_cast<std::size_t>(*v)});
      }
    }
    if (cfg.graph.topology == Topology::explicit_edges && cfg.graph.edges.empty() &&
        !(*t)["edges"]) {
      config_fail(source, "graph.topology = \"explicit\" needs graph.edges");
    }
  }

  BatteryParams battery_defaults;
  double soc_default = 0.5;
  if (const auto* t = sub_table(root, "battery", source)) {
    read_battery(*t, battery_defaults, soc_default, "[battery]", source);
  }

  if (const auto hh = root["household"]) {
    const auto* arr = hh.as_array();
    if (arr == nullptr) config_fail(source, "household must be an array of tables ([[household]])");
    std::set<int> ids;
    for (std::size_t k = 0; k < arr->size(); ++k) {
      const auto* t = (*arr)[k].as_table();
      if (t == nullptr) config_fail(source, "household entries must be tables");
      const auto where = fmt::format("household[{}]", k);
      reject_unknown(*t,
                     {"id", "bus", "phase", "willing", "initial_soc",
                      "measured_angle_deg", "battery"},
                     where, source);
      HouseholdSpec h;
      h.battery = battery_defaults;
      h.initial_soc = soc_default;
      if (!(*t)["id"]) config_fail(source, where + " needs an id");
      if (!(*t)["phase"]) config_fail(source, where + " needs a phase");
      read(*t, "id", h.id, where, source);
      read(*t, "bus", h.bus, where, source);
      std::string phase;
      read(*t, "phase", phase, where, source);
      h.phase = parse_phase(phase, source);
      read(*t, "willing", h.willing, where, source);
      read(*t, "initial_soc", h.initial_soc, where, source);
      if ((*t)["measured_angle_deg"]) {
        double angle = 0.0;
        read(*t, "measured_angle_deg", angle, where, source);
        h.measured_angle_deg = angle;
      }
      if (const auto* bt = sub_table(*t, "battery", source)) {
        read_battery(*bt, h.battery, h.initial_soc, where + ".battery", source);
      }
      if (!ids.insert(h.id).second) {
        config_fail(source, fmt::format("duplicate household id {}", h.id));
      }
      try {
        h.battery.validate();
        (void)make_battery_state(h.initial_soc, h.battery);
      } catch (const std::exception& e) {
        config_fail(source, fmt::format("household {}: {}", h.id, e.what()));
      }
      sc.households.push_back(std::move(h));
    }
  }
  if (sc.households.empty()) config_fail(source, "scenario has no [[household]] entries");

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    config_fail(source, e.what());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string scenario_to_toml(const Scenario& sc) {
  const auto& c = sc.config;
  std::ostringstream out;
  out << "# lvbal scenario v1\n";
  if (!sc.profiles.empty()) out << "profiles = " << quote(sc.profiles) << "\n";
  out << "\n[simulation]\n"
      << "dt_outer_s = " << num(c.dt_outer_s) << "\n"
      << "horizon = " << c.horizon << "\n"
      << "vm = " << num(c.vm) << "\n"
      << "z_n = [" << num(c.z_n.real()) << ", " << num(c.z_n.imag()) << "]\n"
      << "seed = " << static_cast<std::int64_t>(c.seed) << "\n"
      << "balancing = " << (c.balancing ? "true" : "false") << "\n"
      << "angle_noise_deg = " << num(c.angle_noise_deg) << "\n";
  out << "\n[clustering]\n"
      << "clusters = " << c.clustering.clusters << "\n"
      << "dt_inner = " << num(c.clustering.dt_inner) << "\n"
      << "tol = " << num(c.clustering.tol) << "\n"
      << "max_iter = " << c.clustering.max_iter << "\n"
      << "metric = " << quote(std::string(to_string(c.clustering.metric))) << "\n"
      << "init = " << quote(std::string(to_string(c.init))) << "\n";
  out << "\n[graph]\n"
      << "topology = " << quote(std::string(to_string(c.graph.topology))) << "\n"
      << "alpha = " << num(c.graph.alpha) << "\n";
  if (!c.graph.edges.empty()) {
    out << "edges = [";
    for (std::size_t k = 0; k < c.graph.edges.size(); ++k) {
      out << (k ? ", " : "") << "[" << c.graph.edges[k].u << ", "
          << c.graph.edges[k].v << "]";
    }
    out << "]\n";
  }
  for (const auto& h : sc.households) {
    out << "\n[[household]]\n"
        << "id = " << h.id << "\n"
        << "bus = " << h.bus << "\n"
        << "phase = \"" << phase_letter(h.phase) << "\"\n"
        << "willing = " << (h.willing ? "true" : "false") << "\n";
    if (h.measured_angle_deg) {
      out << "measured_angle_deg = " << num(*h.measured_angle_deg) << "\n";
    }
    out << "[household.battery]\n";
    write_battery(out, h.battery, h.initial_soc);
  }
  return out.str();
}

}  // namespace lvbal
