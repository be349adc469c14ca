#include "tvbg/data_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/tokenizer.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tvbg/errors.hpp"

namespace tvbg {
namespace {

constexpr std::string_view kLeadingColumns[] = {"Province/State", "Country/Region", "Lat", "Long"};

std::vector<std::string> split_record(const std::string& line, std::size_t row) {
  using Sep = boost::escaped_list_separator<char>;
  // Backslash is not an escape character in these files.
  boost::tokenizer<Sep> tok(line, Sep('\0', ',', '"'));
  std::vector<std::string> fields;
  try {
    for (const auto& f : tok) fields.push_back(f);
  } catch (const boost::escaped_list_error& e) {
    throw FormatError(fmt::format("row {}: {}", row, e.what()), row);
  }
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::int64_t parse_count(const std::string& cell, std::size_t row, std::size_t col) {
  const auto text = trim(cell);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    // Some exports write whole numbers with a trailing ".0".
    double d = 0.0;
    auto [p2, ec2] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (!text.empty() && ec2 == std::errc{} && p2 == text.data() + text.size() && d == std::floor(d)) {
      return static_cast<std::int64_t>(d);
    }
    throw FormatError(fmt::format("row {}, column {}: non-numeric cell '{}'", row, col, cell), row, col);
  }
  return value;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view series_kind_name(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::confirmed: return "confirmed";
    case SeriesKind::recovered: return "recovered";
    case SeriesKind::deaths: return "deaths";
  }
  return "unknown";
}

std::string series_file_name(SeriesKind kind) {
  return fmt::format("time_series_covid19_{}_global.csv", series_kind_name(kind));
}

std::size_t RawTimeSeriesTable::day_count() const {
  return first_date ? static_cast<std::size_t>(*last_date - *first_date) + 1 : 0;
}

const std::vector<std::int64_t>& RawTimeSeriesTable::series(const std::string& country) const {
  auto it = entries.find(country);
  if (it == entries.end()) {
    throw NotFoundError(fmt::format("unknown country '{}' in {} table", country, series_kind_name(kind)));
  }
  return it->second;
}

RawTimeSeriesTable parse_timeseries_csv(std::string_view content, SeriesKind kind) {
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!line.empty()) {
      header = split_record(line, row);
      break;
    }
  }
  if (header.empty()) throw FormatError("empty table: no header row");
  if (header.size() < 4) {
    throw FormatError(fmt::format("header has {} columns, expected at least 4", header.size()), row);
  }
  for (std::size_t c = 0; c < 4; ++c) {
    if (trim(header[c]) != kLeadingColumns[c]) {
      throw FormatError(fmt::format("header column {} is '{}', expected '{}'", c + 1, header[c],
                                    kLeadingColumns[c]),
                        row, c + 1);
    }
  }

  RawTimeSeriesTable table;
  table.kind = kind;
  const std::size_t ndates = header.size() - 4;
  for (std::size_t c = 0; c < ndates; ++c) {
    Date d;
    try {
      d = Date::parse_mdy(trim(header[c + 4]));
    } catch (const FormatError& e) {
      throw FormatError(fmt::format("header column {}: {}", c + 5, e.what()), row, c + 5);
    }
    if (c == 0) {
      table.first_date = d;
    } else if (d - *table.last_date != 1) {
      throw FormatError(fmt::format("header column {}: date {} does not follow {}", c + 5, d.iso(),
                                    table.last_date->iso()),
                        row, c + 5);
    }
    table.last_date = d;
  }

  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_record(line, row);
    if (fields.size() != header.size()) {
      throw FormatError(fmt::format("row {} has {} fields, header has {}", row, fields.size(),
                                    header.size()),
                        row);
    }
    const std::string country = trim(fields[1]);
    auto& acc = table.entries[country];
    acc.resize(ndates, 0);
    for (std::size_t c = 0; c < ndates; ++c) acc[c] += parse_count(fields[c + 4], row, c + 5);
  }
  return table;
}

RawTimeSeriesTable load_timeseries_csv(const std::filesystem::path& path, SeriesKind kind) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_timeseries_csv(ss.str(), kind);
}

std::string emit_timeseries_csv(const RawTimeSeriesTable& table) {
  std::string out = "Province/State,Country/Region,Lat,Long";
  for (std::size_t c = 0; c < table.day_count(); ++c) {
    std::chrono::year_month_day ymd{(*table.first_date + static_cast<int>(c)).sys_days()};
    out += fmt::format(",{}/{}/{:02d}", static_cast<unsigned>(ymd.month()),
                       static_cast<unsigned>(ymd.day()), static_cast<int>(ymd.year()) % 100);
  }
  out += "\n";
  for (const auto& [country, values] : table.entries) {
    out += "," + quote_if_needed(country) + ",0,0";
    for (auto v : values) out += fmt::format(",{}", v);
    out += "\n";
  }
  return out;
}

ObservationSet derive_observations(const RawTimeSeriesTable& confirmed,
                                   const RawTimeSeriesTable& recovered,
                                   const RawTimeSeriesTable& deaths, const std::string& country,
                                   Date t1, Date t4, double population_n, double scale) {
  if (!(population_n > 0.0)) {
    throw DataError(fmt::format("population must be positive, got {}", population_n));
  }
  if (!(scale > 0.0)) throw DataError(fmt::format("scale must be positive, got {}", scale));
  if (t4 < t1) throw DataError("window end precedes its start");
  for (const auto* t : {&confirmed, &recovered, &deaths}) {
    if (!t->first_date || t1 < *t->first_date || t4 > *t->last_date) {
      throw DataError(fmt::format("window {}..{} outside the {} table", t1.iso(), t4.iso(),
                                  series_kind_name(t->kind)));
    }
  }
  const auto& conf = confirmed.series(country);
  const auto& rec = recovered.series(country);
  const auto& dead = deaths.series(country);

  ObservationSet obs;
  obs.country = country;
  obs.t1 = t1;
  obs.t4 = t4;
  obs.population_n = population_n;
  obs.scale = scale;

  auto cum_at = [](const RawTimeSeriesTable& t, const std::vector<std::int64_t>& v, Date d) -> std::int64_t {
    const int k = d - *t.first_date;
    return k < 0 ? 0 : v[static_cast<std::size_t>(k)];
  };

  const std::int64_t removed_base = cum_at(recovered, rec, t1) + cum_at(deaths, dead, t1);
  std::int64_t removed_running = 0;
  for (Date d = t1; d <= t4; d = d + 1) {
    std::int64_t daily = cum_at(confirmed, conf, d) - cum_at(confirmed, conf, d - 1);
    if (daily < 0) {
      obs.warnings.push_back(fmt::format("{}: confirmed count falls by {}; daily cases set to 0",
                                         d.iso(), -daily));
      daily = 0;
    }
    obs.idata.push_back(static_cast<double>(daily) * scale);

    std::int64_t removed = cum_at(recovered, rec, d) + cum_at(deaths, dead, d) - removed_base;
    if (removed < removed_running) {
      obs.warnings.push_back(fmt::format("{}: removed count falls by {}; held at previous level",
                                         d.iso(), removed_running - removed));
      removed = removed_running;
    }
    removed_running = removed;
    obs.rcum.push_back(static_cast<double>(removed) * scale);
  }
  return obs;
}

CountryData CountryData::load(const std::filesystem::path& dir) {
  return {load_timeseries_csv(dir / series_file_name(SeriesKind::confirmed), SeriesKind::confirmed),
          load_timeseries_csv(dir / series_file_name(SeriesKind::recovered), SeriesKind::recovered),
          load_timeseries_csv(dir / series_file_name(SeriesKind::deaths), SeriesKind::deaths)};
}

std::vector<std::string> CountryData::countries() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : confirmed.entries) {
    if (recovered.entries.count(name) && deaths.entries.count(name)) out.push_back(name);
  }
  return out;
}

std::map<std::string, double> load_population_table(const std::filesystem::path& path) {
  std::map<std::string, double> out;
  std::ifstream f(path);
  if (!f) return out;
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
  if (!j.is_object()) throw FormatError(fmt::format("{}: expected a JSON object", path.string()));
  for (const auto& [name, value] : j.items()) {
    if (name.rfind("_", 0) == 0) continue;  // metadata keys
    if (!value.is_number()) {
      throw FormatError(fmt::format("{}: population of '{}' is not a number", path.string(), name));
    }
    out[name] = value.get<double>();
  }
  return out;
}

}  // namespace tvbg
