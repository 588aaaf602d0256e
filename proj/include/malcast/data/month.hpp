#pragma once

#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "malcast/core/text.hpp"
#include "malcast/error.hpp"

namespace malcast {

struct MonthKey {
  int year = 2010;
  int month = 1;  // 1..12

  static MonthKey from_index(long idx) {
    const long y = idx >= 0 ? idx / 12 : (idx - 11) / 12;
    return {static_cast<int>(y), static_cast<int>(idx - y * 12) + 1};
  }

  /// Months since year 0, so consecutive months differ by exactly 1.
  long index() const noexcept { return static_cast<long>(year) * 12 + (month - 1); }

  MonthKey next() const { return from_index(index() + 1); }
  MonthKey plus(long months) const { return from_index(index() + months); }

  bool valid() const noexcept { return month >= 1 && month <= 12; }

  /// "YYYY-MM"
  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
  }

  static MonthKey parse(std::string_view s) {
    s = text::trim(s);
    const auto dash = s.find('-');
    if (dash == std::string_view::npos) throw DataError("malformed month '" + std::string(s) + "', expected YYYY-MM");
    const auto y = text::parse_int(s.substr(0, dash));
    const auto m = text::parse_int(s.substr(dash + 1));
    if (!y || !m || *m < 1 || *m > 12) throw DataError("malformed month '" + std::string(s) + "', expected YYYY-MM");
    return {static_cast<int>(*y), static_cast<int>(*m)};
  }

  friend auto operator<=>(const MonthKey& a, const MonthKey& b) noexcept { return a.index() <=> b.index(); }
  friend bool operator==(const MonthKey& a, const MonthKey& b) noexcept { return a.index() == b.index(); }
};

/// Number of months in the inclusive range [first, last].
inline long month_span(MonthKey first, MonthKey last) noexcept { return last.index() - first.index() + 1; }

}  // namespace malcast
