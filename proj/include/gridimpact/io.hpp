#pragma once

#include "gridimpact/devices.hpp"
#include "gridimpact/fleet.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridimpact
{

/// Malformed or inconsistent input; the message names the file and the
/// offending row, column or field.
class InputError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kCountySchemaVersion = 1;

/// Comma-separated table with a header row. Blank lines and lines starting
/// with '#' are skipped.
struct CsvTable
{
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers; ///< 1-based file line of each row

    std::size_t column(std::string_view name) const;
    double number(std::size_t row, std::size_t col) const;
    std::string where(std::size_t row, std::size_t col) const;
};

CsvTable parse_csv(std::string_view text, std::string source);
CsvTable read_csv(std::filesystem::path const& path);

/// "YYYY-MM-DD HH:MM[:SS]" or with a 'T' separator, UTC.
Timestamp parse_timestamp(std::string_view s);
std::string format_timestamp(Timestamp t);

/// Columns: timestamp, outdoor_temp_C.
WeatherSeries load_weather(std::filesystem::path const& path);
WeatherSeries parse_weather(CsvTable const& table);

/// Columns: outdoor_temp_C, capacity_kW, cop.
PerformanceCurve load_curve(std::filesystem::path const& path);
/// Columns: outdoor_temp_C, multiplier.
TemperatureCurve load_multiplier_curve(std::filesystem::path const& path);
/// Columns: timestamp, value_kW; uniform samples covering exactly one day.
DailyProfile load_daily_profile(std::filesystem::path const& path);
DailyProfile parse_daily_profile(CsvTable const& table);

/// Columns: type, weight, floor_area_m2, resistance_C_per_kW, capacitance_kWh_per_C.
std::vector<HousingArchetype> load_housing_mix(std::filesystem::path const& path);
/// Columns: vehicles, probability.
std::vector<CountProbability> load_vehicle_counts(std::filesystem::path const& path);

/// County description in JSON; relative paths resolve against the file's
/// directory. The county is validated before returning.
CountySpec load_county(std::filesystem::path const& path);

} // namespace gridimpact
