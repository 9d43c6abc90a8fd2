#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace spillcast {

using Date = std::chrono::sys_days;

inline std::optional<Date> parse_date(std::string_view text) {
  // strict YYYY-MM-DD
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto parse = [](std::string_view s, auto& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
  };
  if (!parse(text.substr(0, 4), y) || !parse(text.substr(5, 2), m) || !parse(text.substr(8, 2), d))
    return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline std::string format_date(Date date) {
  std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline int year_of(Date date) { return static_cast<int>(std::chrono::year_month_day{date}.year()); }

inline Date year_start(int year) {
  return Date{std::chrono::year{year} / std::chrono::January / 1};
}

inline int days_in_year(int year) { return std::chrono::year{year}.is_leap() ? 366 : 365; }

/// Zero-based day of year.
inline int day_of_year(Date date) { return static_cast<int>((date - year_start(year_of(date))).count()); }

/// Index 0..365 on a leap-year calendar so that Mar 1 lines up across years.
inline int leap_calendar_index(Date date) {
  std::chrono::year_month_day ymd{date};
  Date in_leap{std::chrono::year{2000} / ymd.month() / ymd.day()};
  return static_cast<int>((in_leap - year_start(2000)).count());
}

inline long days_between(Date from, Date to) { return (to - from).count(); }

inline Date add_days(Date date, long n) { return date + std::chrono::days{n}; }

}  // namespace spillcast
