#pragma once

// Reader for the JHU CSSE / HDX global time-series tables
// (time_series_covid19_{confirmed,recovered,deaths}_global.csv): one row per
// province/country, cumulative counts in one column per day.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tvbg/calibration.hpp"
#include "tvbg/date.hpp"

namespace tvbg {

enum class SeriesKind { confirmed, recovered, deaths };

std::string_view series_kind_name(SeriesKind kind);
/// Conventional file name of the HDX export for `kind`.
std::string series_file_name(SeriesKind kind);

struct RawTimeSeriesTable {
  SeriesKind kind = SeriesKind::confirmed;
  std::optional<Date> first_date;  // empty when the table has no date columns
  std::optional<Date> last_date;
  std::map<std::string, std::vector<std::int64_t>> entries;  // country -> cumulative counts

  std::size_t day_count() const;
  const std::vector<std::int64_t>& series(const std::string& country) const;
};

RawTimeSeriesTable parse_timeseries_csv(std::string_view content, SeriesKind kind);
RawTimeSeriesTable load_timeseries_csv(const std::filesystem::path& path, SeriesKind kind);

/// Emits a table in the same wide format, one row per country.
std::string emit_timeseries_csv(const RawTimeSeriesTable& table);

ObservationSet derive_observations(const RawTimeSeriesTable& confirmed,
                                   const RawTimeSeriesTable& recovered,
                                   const RawTimeSeriesTable& deaths, const std::string& country,
                                   Date t1, Date t4, double population_n, double scale = 1.0);

/// The three tables found under one directory.
struct CountryData {
  RawTimeSeriesTable confirmed;
  RawTimeSeriesTable recovered;
  RawTimeSeriesTable deaths;

  static CountryData load(const std::filesystem::path& dir);
  std::vector<std::string> countries() const;
};

/// Country -> population, read from a JSON object file. Missing file yields an empty map.
std::map<std::string, double> load_population_table(const std::filesystem::path& path);

}  // namespace tvbg
