#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "malcast/data/month.hpp"
#include "malcast/error.hpp"

namespace malcast {

/// Administrative level a dataset is expressed at.
enum class Scheme { Old, New, Country };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::Old: return "old";
    case Scheme::New: return "new";
    case Scheme::Country: return "country";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view s) {
  if (s == "old") return Scheme::Old;
  if (s == "new") return Scheme::New;
  if (s == "country") return Scheme::Country;
  throw ArgumentError("unknown scheme '" + std::string(s) + "' (expected old|new|country)");
}

inline constexpr std::string_view kCountryName = "Burundi";

/// The 18 provinces before the redistricting reform.
inline constexpr std::array<std::string_view, 18> kOldProvinces = {
    "Bubanza", "Bujumbura Mairie", "Bujumbura Rural", "Bururi", "Cankuzo", "Cibitoke",
    "Gitega",  "Karuzi",           "Kayanza",         "Kirundo", "Makamba", "Muramvya",
    "Muyinga", "Mwaro",            "Ngozi",           "Rumonge", "Rutana",  "Ruyigi"};

/// The 5 provinces after the reform, in report order.
inline constexpr std::array<std::string_view, 5> kNewProvinces = {"Bujumbura", "Gitega", "Burunga", "Butanyerera",
                                                                  "Buhumuza"};

inline bool is_old_province(std::string_view name) {
  return std::find(kOldProvinces.begin(), kOldProvinces.end(), name) != kOldProvinces.end();
}

inline bool is_new_province(std::string_view name) {
  return std::find(kNewProvinces.begin(), kNewProvinces.end(), name) != kNewProvinces.end();
}

/// One province-month observation. Only the three climate fields may be
/// missing.
struct MonthlyRecord {
  std::string province;
  MonthKey month;
  std::optional<double> temp_mean;     // deg C
  std::optional<double> rainfall;      // mm
  std::optional<double> rel_humidity;  // %
  std::int64_t population = 1;
  std::int64_t cases = 0;

  bool climate_complete() const noexcept {
    return temp_mean.has_value() && rainfall.has_value() && rel_humidity.has_value();
  }

  friend bool operator==(const MonthlyRecord&, const MonthlyRecord&) = default;
};

/// Throws DataError when a single record violates the field invariants.
inline void validate_record(const MonthlyRecord& r) {
  if (!r.month.valid()) throw DataError("month out of range for province '" + r.province + "'");
  if (r.population <= 0)
    throw DataError("population must be > 0 (province '" + r.province + "', " + r.month.str() + ")");
  if (r.cases < 0) throw DataError("negative cases (province '" + r.province + "', " + r.month.str() + ")");
  if (r.rel_humidity && (*r.rel_humidity < 0.0 || *r.rel_humidity > 100.0))
    throw DataError("relative humidity outside [0,100] (province '" + r.province + "', " + r.month.str() + ")");
  for (const auto& v : {r.temp_mean, r.rainfall, r.rel_humidity})
    if (v && !std::isfinite(*v))
      throw DataError("non-finite climate value (province '" + r.province + "', " + r.month.str() + ")");
}

/// Chronologically ordered, gap-free monthly series keyed by province; every
/// province spans the same month range.
class Dataset {
 public:
  using Series = std::vector<MonthlyRecord>;

  Dataset() = default;

  /// Sorts, validates and gap-checks. Throws DataError on any violation.
  static Dataset from_records(Scheme scheme, std::vector<MonthlyRecord> records) {
    Dataset d;
    d.scheme_ = scheme;
    for (auto& r : records) {
      validate_record(r);
      d.series_[r.province].push_back(std::move(r));
    }
    std::optional<MonthKey> first, last;
    for (auto& [name, s] : d.series_) {
      std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.month < b.month; });
      for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i].month == s[i - 1].month)
          throw DataError("duplicate month " + s[i].month.str() + " for province '" + name + "'");
        if (s[i].month.index() != s[i - 1].month.index() + 1)
          throw DataError("month gap in province '" + name + "': " + s[i - 1].month.next().str() + " missing between " +
                          s[i - 1].month.str() + " and " + s[i].month.str());
      }
      if (!first) {
        first = s.front().month;
        last = s.back().month;
      } else if (s.front().month != *first || s.back().month != *last) {
        throw DataError("province '" + name + "' covers " + s.front().month.str() + ".." + s.back().month.str() +
                        " but other provinces cover " + first->str() + ".." + last->str());
      }
    }
    return d;
  }

  Scheme scheme() const noexcept { return scheme_; }
  bool empty() const noexcept { return series_.empty(); }
  std::size_t province_count() const noexcept { return series_.size(); }

  /// Months per province (all provinces share it).
  std::size_t length() const noexcept { return series_.empty() ? 0 : series_.begin()->second.size(); }

  MonthKey first_month() const { return require_nonempty().begin()->second.front().month; }
  MonthKey last_month() const { return require_nonempty().begin()->second.back().month; }

  std::vector<MonthKey> months() const {
    std::vector<MonthKey> out;
    if (empty()) return out;
    for (const auto& r : series_.begin()->second) out.push_back(r.month);
    return out;
  }

  std::vector<std::string> provinces() const {
    std::vector<std::string> out;
    for (const auto& [name, s] : series_) out.push_back(name);
    return out;
  }

  bool has(std::string_view province) const { return series_.find(std::string(province)) != series_.end(); }

  const Series& series(std::string_view province) const {
    auto it = series_.find(std::string(province));
    if (it == series_.end()) throw ArgumentError("no province '" + std::string(province) + "' in dataset");
    return it->second;
  }

  const std::map<std::string, Series>& all_series() const noexcept { return series_; }

  /// Records in province-then-month order.
  std::vector<MonthlyRecord> records() const {
    std::vector<MonthlyRecord> out;
    for (const auto& [name, s] : series_) out.insert(out.end(), s.begin(), s.end());
    return out;
  }

  std::size_t missing_climate_count() const {
    std::size_t n = 0;
    for (const auto& [name, s] : series_)
      for (const auto& r : s) n += !r.temp_mean + !r.rainfall + !r.rel_humidity;
    return n;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  const std::map<std::string, Series>& require_nonempty() const {
    if (series_.empty()) throw ArgumentError("dataset is empty");
    return series_;
  }

  Scheme scheme_ = Scheme::Old;
  std::map<std::string, Series> series_;
};

}  // namespace malcast
