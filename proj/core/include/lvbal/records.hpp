#ifndef LVBAL_RECORDS_HPP_
#define LVBAL_RECORDS_HPP_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lvbal/engine.hpp"

namespace lvbal {

/// First line of a bus records file; the outer step length follows it.
inline constexpr const char* kBusRecordsTag = "# lvbal-records v1";
inline constexpr const char* kHouseholdRecordsTag = "# lvbal-households v1";

/// One row per step and bus. Numbers use the shortest round-trip form, so
/// identical runs give identical bytes.
void write_bus_records(std::ostream& out, std::span<const StepRecord> steps,
                       double dt_outer_s);

/// One row per step and household.
void write_household_records(std::ostream& out,
                             std::span<const StepRecord> steps);

struct BusRecordTable {
  double dt_outer_s = 60.0;
  std::vector<BusRecord> rows;
};

/// Reads a file written by write_bus_records. Throws DataError when the file
/// is empty, has the wrong header or a malformed row.
[[nodiscard]] BusRecordTable read_bus_records(std::istream& in,
                                             const std::string& source = "<stream>");
[[nodiscard]] BusRecordTable load_bus_records(const std::filesystem::path& path);

/// Pretty-printed JSON object, keys in a fixed order.
[[nodiscard]] std::string summary_to_json(const RunSummary& s);

}  // namespace lvbal

#endif  // LVBAL_RECORDS_HPP_
