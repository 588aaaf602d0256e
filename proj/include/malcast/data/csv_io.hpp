#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "malcast/core/text.hpp"
#include "malcast/data/dataset.hpp"
#include "malcast/error.hpp"

namespace malcast {

inline constexpr std::string_view kCanonicalHeader =
    "province,year,month,temp_mean,rainfall,rel_humidity,population,cases";

struct IngestOptions {
  /// Forces the scheme instead of inferring it from province names.
  std::optional<Scheme> scheme;
  /// Names accepted in addition to the built-in province lists (custom maps in tests).
  std::set<std::string> extra_provinces;
};

namespace detail {

inline Scheme infer_scheme(const std::set<std::string>& names) {
  bool any_only_old = false, any_only_new = false, all_country = !names.empty();
  for (const auto& n : names) {
    const bool o = is_old_province(n), w = is_new_province(n);
    any_only_old |= o && !w;
    any_only_new |= w && !o;
    all_country &= n == kCountryName;
  }
  if (all_country) return Scheme::Country;
  if (any_only_old && any_only_new) throw DataError("file mixes old-scheme and new-scheme province names");
  if (any_only_new) return Scheme::New;
  return Scheme::Old;
}

}  // namespace detail

/// Parses the monthly province CSV. Empty climate cells become missing.
/// Either `temp_mean` or the pair `temp_min,temp_max` (averaged) must be
/// present. Errors name the 1-based file row.
inline Dataset ingest_csv(std::istream& in, const IngestOptions& opts = {}) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("row 1: empty input, expected header");
  const auto header = text::split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!col.emplace(header[i], i).second) throw DataError("row 1: duplicate column '" + header[i] + "'");
  }
  const bool has_mean = col.count("temp_mean") != 0;
  const bool has_minmax = col.count("temp_min") != 0 && col.count("temp_max") != 0;
  if (!has_mean && !has_minmax) throw DataError("row 1: header needs temp_mean or temp_min,temp_max");
  for (const char* name : {"province", "year", "month", "rainfall", "rel_humidity", "population", "cases"})
    if (!col.count(name)) throw DataError(std::string("row 1: missing column '") + name + "'");

  std::vector<MonthlyRecord> records;
  std::set<std::string> names;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    const auto f = text::split_csv_line(line);
    const auto where = "row " + std::to_string(row) + ": ";
    if (f.size() != header.size())
      throw DataError(where + "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    auto cell = [&](const char* name) -> const std::string& { return f[col.at(name)]; };
    auto integer = [&](const char* name) {
      auto v = text::parse_int(cell(name));
      if (!v) throw DataError(where + "malformed " + name + " '" + cell(name) + "'");
      return *v;
    };
    auto optional_real = [&](const char* name) -> std::optional<double> {
      if (cell(name).empty()) return std::nullopt;
      auto v = text::parse_real(cell(name));
      if (!v || !std::isfinite(*v)) throw DataError(where + "malformed " + name + " '" + cell(name) + "'");
      return v;
    };

    MonthlyRecord r;
    r.province = cell("province");
    if (r.province.empty()) throw DataError(where + "empty province");
    if (!is_old_province(r.province) && !is_new_province(r.province) && r.province != kCountryName &&
        !opts.extra_provinces.count(r.province))
      throw DataError(where + "unknown province '" + r.province + "'");
    const auto year = integer("year");
    const auto month = integer("month");
    if (month < 1 || month > 12) throw DataError(where + "month " + std::to_string(month) + " outside 1..12");
    r.month = {static_cast<int>(year), static_cast<int>(month)};
    if (has_mean) {
      r.temp_mean = optional_real("temp_mean");
    } else {
      const auto lo = optional_real("temp_min");
      const auto hi = optional_real("temp_max");
      if (lo && hi) r.temp_mean = 0.5 * (*lo + *hi);
    }
    r.rainfall = optional_real("rainfall");
    r.rel_humidity = optional_real("rel_humidity");
    r.population = integer("population");
    r.cases = integer("cases");
    try {
      validate_record(r);
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    names.insert(r.province);
    records.push_back(std::move(r));
  }
  if (records.empty()) throw DataError("no data rows");
  const Scheme scheme = opts.scheme ? *opts.scheme : detail::infer_scheme(names);
  return Dataset::from_records(scheme, std::move(records));
}

inline Dataset ingest_csv_file(const std::string& path, const IngestOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return ingest_csv(in, opts);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

/// Canonical-header CSV, province-then-month order, missing climate as empty cells.
inline void write_csv(std::ostream& out, const Dataset& d) {
  out << kCanonicalHeader << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? text::format_real(*v) : std::string(); };
  for (const auto& r : d.records()) {
    out << r.province << ',' << r.month.year << ',' << r.month.month << ',' << opt(r.temp_mean) << ','
        << opt(r.rainfall) << ',' << opt(r.rel_humidity) << ',' << r.population << ',' << r.cases << '\n';
  }
}

inline std::string to_csv_string(const Dataset& d) {
  std::ostringstream os;
  write_csv(os, d);
  return os.str();
}

}  // namespace malcast
