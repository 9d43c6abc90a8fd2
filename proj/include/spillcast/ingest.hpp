#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "spillcast/config.hpp"
#include "spillcast/date.hpp"
#include "spillcast/error.hpp"
#include "spillcast/io.hpp"
#include "spillcast/series.hpp"

namespace spillcast {

/// Longest run of missing days that is filled by linear interpolation.
inline constexpr long kMaxInterpolatedGap = 3;

namespace detail {

inline std::string at_line(int line) { return "line " + std::to_string(line); }

}  // namespace detail

/// Parses `date,temp_mean,humidity,precip` (an optional trailing `source`
/// column is accepted and ignored). Short gaps are interpolated and flagged.
inline WeatherSeries parse_weather(const std::vector<std::string>& lines) {
  if (lines.empty()) throw Error(Errc::ParseError, "empty weather file");
  const auto header = io::split(lines[0]);
  const bool has_source = header.size() == 5 && header[4] == "source";
  if (!(header.size() == 4 || has_source) || header[0] != "date" || header[1] != "temp_mean" ||
      header[2] != "humidity" || header[3] != "precip")
    throw Error(Errc::ParseError, "line 1: expected header date,temp_mean,humidity,precip");

  std::vector<WeatherRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    if (io::trim(lines[i]).empty()) continue;
    const auto f = io::split(lines[i]);
    if (f.size() != header.size()) throw Error(Errc::ParseError, detail::at_line(line_no) + ": wrong field count");
    const auto date = parse_date(f[0]);
    const auto t = io::parse_double(f[1]);
    const auto h = io::parse_double(f[2]);
    const auto p = io::parse_double(f[3]);
    if (!date || !t || !h || !p) throw Error(Errc::ParseError, detail::at_line(line_no));
    if (!std::isfinite(*t)) throw Error(Errc::RangeViolation, "temp_mean, " + detail::at_line(line_no));
    if (!(*h >= 0.0 && *h <= 100.0)) throw Error(Errc::RangeViolation, "humidity, " + detail::at_line(line_no));
    if (!(*p >= 0.0) || !std::isfinite(*p)) throw Error(Errc::RangeViolation, "precip, " + detail::at_line(line_no));

    WeatherRecord rec{*date, *t, *h, *p, false};
    if (!out.empty()) {
      const WeatherRecord prev = out.back();
      const long step = days_between(prev.date, rec.date);
      if (step <= 0) throw Error(Errc::ParseError, detail::at_line(line_no) + ": dates not strictly increasing");
      const long missing = step - 1;
      if (missing > kMaxInterpolatedGap)
        throw Error(Errc::GapTooLong, format_date(add_days(prev.date, 1)) + ".." + format_date(add_days(rec.date, -1)));
      for (long k = 1; k <= missing; ++k) {
        const double a = static_cast<double>(k) / static_cast<double>(step);
        out.push_back({add_days(prev.date, k), prev.temp_mean + a * (rec.temp_mean - prev.temp_mean),
                       prev.humidity + a * (rec.humidity - prev.humidity),
                       prev.precip + a * (rec.precip - prev.precip), true});
      }
    }
    out.push_back(rec);
  }
  return WeatherSeries(std::move(out));
}

inline WeatherSeries load_weather(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(Errc::MissingFile, path.string());
  return parse_weather(io::read_lines(path));
}

/// Serializes in the ingest schema. With `forecast_from`, a `source` column
/// marks records on or after that date as forecast.
inline std::string format_weather(const WeatherSeries& w, std::optional<Date> forecast_from = std::nullopt) {
  std::ostringstream out;
  out << "date,temp_mean,humidity,precip" << (forecast_from ? ",source" : "") << '\n';
  for (const auto& r : w) {
    out << format_date(r.date) << ',' << io::fmt(r.temp_mean) << ',' << io::fmt(r.humidity) << ','
        << io::fmt(r.precip);
    if (forecast_from) out << ',' << (r.date >= *forecast_from ? "forecast" : "observed");
    out << '\n';
  }
  return out.str();
}

inline CaseSeries parse_cases(const std::vector<std::string>& lines) {
  if (lines.empty()) throw Error(Errc::ParseError, "empty case file");
  const auto header = io::split(lines[0]);
  if (header.size() != 2 || header[0] != "week_start" || header[1] != "count")
    throw Error(Errc::ParseError, "line 1: expected header week_start,count");

  std::vector<CaseRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    if (io::trim(lines[i]).empty()) continue;
    const auto f = io::split(lines[i]);
    if (f.size() != 2) throw Error(Errc::ParseError, detail::at_line(line_no) + ": wrong field count");
    const auto date = parse_date(f[0]);
    const auto count = io::parse_long(f[1]);
    if (!date || !count) throw Error(Errc::ParseError, detail::at_line(line_no));
    if (*count < 0) throw Error(Errc::NegativeCount, detail::at_line(line_no));
    if (!out.empty()) {
      const long step = days_between(out.back().week_start, *date);
      if (step <= 0 || step % 7 != 0)
        throw Error(Errc::NonWeeklySpacing, detail::at_line(line_no) + ": " + std::to_string(step) + " days after previous week");
      for (long k = 7; k < step; k += 7) out.push_back({add_days(out.back().week_start, 7), 0, true});
    }
    out.push_back({*date, *count, false});
  }
  return CaseSeries(std::move(out));
}

inline CaseSeries load_cases(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(Errc::MissingFile, path.string());
  return parse_cases(io::read_lines(path));
}

inline std::string format_cases(const CaseSeries& cases) {
  std::ostringstream out;
  out << "week_start,count\n";
  for (const auto& r : cases) out << format_date(r.week_start) << ',' << r.count << '\n';
  return out.str();
}

}  // namespace spillcast
