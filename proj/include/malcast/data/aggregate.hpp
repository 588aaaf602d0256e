#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "malcast/data/dataset.hpp"
#include "malcast/data/redistricting.hpp"
#include "malcast/error.hpp"

namespace malcast {

/// (province, year) -> persons
using AnnualPopulation = std::map<std::pair<std::string, int>, std::int64_t>;

/// Spreads annual population over the months [first, last]: each month of a
/// year carries that year's value. Returns province -> monthly values.
inline std::map<std::string, std::vector<std::int64_t>> expand_population(const AnnualPopulation& annual,
                                                                          MonthKey first, MonthKey last) {
  if (last < first) throw ArgumentError("expand_population: empty month range");
  std::set<std::string> provinces;
  for (const auto& [key, v] : annual) provinces.insert(key.first);
  std::map<std::string, std::vector<std::int64_t>> out;
  for (const auto& p : provinces) {
    auto& col = out[p];
    for (MonthKey m = first; m <= last; m = m.next()) {
      auto it = annual.find({p, m.year});
      if (it == annual.end())
        throw CoverageError("expand_population: no population for '" + p + "' in " + std::to_string(m.year));
      col.push_back(it->second);
    }
  }
  return out;
}

namespace detail {

/// Combines member series month by month: climate means, population and case
/// sums. Members must all be climate-complete and share one month range.
inline std::vector<MonthlyRecord> combine_members(const std::string& name, const Dataset& d,
                                                  const std::vector<std::string>& members) {
  const std::size_t n = d.length();
  std::vector<MonthlyRecord> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    double temp = 0.0, rain = 0.0, hum = 0.0;
    std::int64_t pop = 0, cases = 0;
    for (const auto& m : members) {
      const auto& r = d.series(m)[t];
      if (!r.climate_complete())
        throw PreconditionError("missing climate value for '" + m + "' at " + r.month.str() +
                                "; run imputation before aggregating");
      temp += *r.temp_mean;
      rain += *r.rainfall;
      hum += *r.rel_humidity;
      pop += r.population;
      cases += r.cases;
    }
    const double k = static_cast<double>(members.size());
    auto& o = out[t];
    o.province = name;
    o.month = d.series(members.front())[t].month;
    o.temp_mean = temp / k;
    o.rainfall = rain / k;
    o.rel_humidity = hum / k;
    o.population = pop;
    o.cases = cases;
  }
  return out;
}

}  // namespace detail

/// Regroups old provinces into new ones: climate is averaged over members,
/// population and cases are summed. Every dataset province must be mapped,
/// and every mapped province must be present.
inline Dataset aggregate_provinces(const Dataset& d, const RedistrictingMap& map) {
  if (d.empty()) throw ArgumentError("aggregate_provinces: empty dataset");
  for (const auto& p : d.provinces())
    if (!map.contains(p)) throw MapError("province '" + p + "' is not in the redistricting map");
  std::vector<MonthlyRecord> records;
  for (const auto& [target, members] : map.groups()) {
    for (const auto& m : members)
      if (!d.has(m)) throw MapError("mapped province '" + m + "' (-> " + target + ") is absent from the dataset");
    auto rows = detail::combine_members(target, d, members);
    records.insert(records.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  return Dataset::from_records(Scheme::New, std::move(records));
}

/// Single national series: climate mean over provinces, population and cases summed.
inline Dataset to_country_level(const Dataset& d) {
  if (d.empty()) throw ArgumentError("to_country_level: empty dataset");
  if (d.scheme() != Scheme::New)
    throw PreconditionError("to_country_level expects the new 5-province scheme, got '" +
                            std::string(to_string(d.scheme())) + "'");
  auto records = detail::combine_members(std::string(kCountryName), d, d.provinces());
  return Dataset::from_records(Scheme::Country, std::move(records));
}

}  // namespace malcast
