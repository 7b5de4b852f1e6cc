#ifndef LVBAL_PROFILES_HPP_
#define LVBAL_PROFILES_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace lvbal {

/// Load and PV time series of one household, kW per outer step.
struct ProfileSeries {
  std::vector<double> load_kw;
  std::vector<double> pv_kw;

  bool operator==(const ProfileSeries&) const = default;
};

using ProfileSet = std::map<int, ProfileSeries>;

inline constexpr const char* kProfilesHeader =
    "step,household_id,p_load_kw,p_pv_kw";

/// Parses the long-format profile CSV (one row per step and household).
/// Lines starting with '#' are comments; the column header is optional.
/// Every household seen must cover steps 0..horizon-1; rows beyond the
/// horizon are ignored. Throws DataError on a malformed row, a duplicate
/// (step, household), negative or non-finite PV, or a coverage gap.
[[nodiscard]] ProfileSet parse_profiles(std::istream& in, std::size_t horizon,
                                        const std::string& source = "<stream>");

/// Throws DataError if the file cannot be opened (message carries the path).
[[nodiscard]] ProfileSet load_profiles(const std::filesystem::path& path,
                                       std::size_t horizon);

void write_profiles(std::ostream& out, const ProfileSet& profiles);

}  // namespace lvbal

#endif  // LVBAL_PROFILES_HPP_
