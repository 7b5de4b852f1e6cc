#include "lvbal/profiles.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <algorithm>
#include <string_view>
#include <utility>

#include <fmt/format.h>

#include "lvbal/errors.hpp"

namespace lvbal {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool parse_field(std::string_view text, T& out) {
  text = trim(text);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

ProfileSet parse_profiles(std::istream& in, std::size_t horizon,
                          const std::string& source) {
  std::map<int, std::vector<std::pair<double, double>>> raw;
  std::map<int, std::vector<bool>> seen;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw DataError(fmt::format("{}:{}: {}", source, line_no, why));
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (text == kProfilesHeader) continue;

    std::string_view fields[4];
    std::size_t count = 0;
    std::string_view rest = text;
    while (count < 4) {
      const auto comma = rest.find(',');
      fields[count++] = rest.substr(0, comma);
      if (comma == std::string_view::npos) {
        rest = {};
        break;
      }
      rest.remove_prefix(comma + 1);
      if (count == 4) fail("expected 4 columns, found more");
    }
    if (count != 4) fail("expected 4 columns (" + std::string(kProfilesHeader) + ")");

    long long step = 0;
    int id = 0;
    double load = 0.0;
    double pv = 0.0;
    if (!parse_field(fields[0], step) || step < 0) fail("bad step value");
    if (!parse_field(fields[1], id)) fail("bad household_id value");
    if (!parse_field(fields[2], load) || !std::isfinite(load)) {
      fail("bad p_load_kw value");
    }
    if (!parse_field(fields[3], pv) || !std::isfinite(pv)) {
      fail("bad p_pv_kw value");
    }
    if (pv < 0.0) fail("negative p_pv_kw");

    auto& marks = seen[id];
    auto& series = raw[id];
    const auto s = static_cast<std::size_t>(step);
    if (marks.size() <= s) {
      marks.resize(s + 1, false);
      series.resize(s + 1);
    }
    if (marks[s]) {
      fail(fmt::format("duplicate row for step {} household {}", step, id));
    }
    marks[s] = true;
    series[s] = {load, pv};
  }

  ProfileSet out;
  for (auto& [id, series] : raw) {
    const auto& marks = seen[id];
    for (std::size_t t = 0; t < horizon; ++t) {
      if (t >= marks.size() || !marks[t]) {
        throw DataError(fmt::format(
            "{}: household {} has no profile row for step {}", source, id, t));
      }
    }
    ProfileSeries ps;
    ps.load_kw.reserve(horizon);
    ps.pv_kw.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      ps.load_kw.push_back(series[t].first);
      ps.pv_kw.push_back(series[t].second);
    }
    out.emplace(id, std::move(ps));
  }
  return out;
}

ProfileSet load_profiles(const std::filesystem::path& path,
                         std::size_t horizon) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open profiles file: " + path.string());
  }
  return parse_profiles(in, horizon, path.string());
}

void write_profiles(std::ostream& out, const ProfileSet& profiles) {
  out << "# lvbal-profiles v1\n" << kProfilesHeader << '\n';
  std::size_t steps = 0;
  for (const auto& [id, ps] : profiles) steps = std::max(steps, ps.load_kw.size());
  for (std::size_t t = 0; t < steps; ++t) {
    for (const auto& [id, ps] : profiles) {
      if (t >= ps.load_kw.size()) continue;
      out << fmt::format("{},{},{},{}\n", t, id, ps.load_kw[t], ps.pv_kw[t]);
    }
  }
}

}  // namespace lvbal
