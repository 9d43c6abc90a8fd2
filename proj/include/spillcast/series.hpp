#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spillcast/date.hpp"
#include "spillcast/error.hpp"

namespace spillcast {

struct WeatherRecord {
  Date date{};
  double temp_mean = 0.0;  // degC
  double humidity = 0.0;   // relative %, 0..100
  double precip = 0.0;     // mm/day
  bool interpolated = false;
};

/// Contiguous daily weather. Validated on construction, immutable afterwards.
class WeatherSeries {
 public:
  WeatherSeries() = default;

  explicit WeatherSeries(std::vector<WeatherRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (!std::isfinite(r.temp_mean) || !std::isfinite(r.humidity) || !std::isfinite(r.precip))
        throw Error(Errc::NonFiniteInput, "weather record " + format_date(r.date));
      if (r.humidity < 0.0 || r.humidity > 100.0)
        throw Error(Errc::RangeViolation, "humidity out of [0,100] on " + format_date(r.date));
      if (r.precip < 0.0)
        throw Error(Errc::RangeViolation, "negative precip on " + format_date(r.date));
      if (i > 0 && days_between(records_[i - 1].date, r.date) != 1)
        throw Error(Errc::ParseError, "weather dates not contiguous at " + format_date(r.date));
    }
  }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const WeatherRecord& operator[](std::size_t i) const { return records_[i]; }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }
  const std::vector<WeatherRecord>& records() const { return records_; }

  Date first_date() const { return records_.front().date; }
  Date last_date() const { return records_.back().date; }

  std::vector<double> temps() const { return column(&WeatherRecord::temp_mean); }
  std::vector<double> humidities() const { return column(&WeatherRecord::humidity); }
  std::vector<double> precips() const { return column(&WeatherRecord::precip); }

  /// Index of `date`, or -1 when outside the series.
  long index_of(Date date) const {
    if (records_.empty()) return -1;
    const long i = days_between(first_date(), date);
    return (i >= 0 && i < static_cast<long>(size())) ? i : -1;
  }

  /// Records with first <= date < last (clipped to the series).
  WeatherSeries slice(Date first, Date last) const {
    std::vector<WeatherRecord> out;
    for (const auto& r : records_)
      if (r.date >= first && r.date < last) out.push_back(r);
    return WeatherSeries(std::move(out));
  }

  WeatherSeries year(int y) const { return slice(year_start(y), year_start(y + 1)); }

  std::vector<int> years() const {
    std::vector<int> out;
    for (const auto& r : records_)
      if (out.empty() || out.back() != year_of(r.date)) out.push_back(year_of(r.date));
    return out;
  }

 private:
  std::vector<double> column(double WeatherRecord::*field) const {
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.*field);
    return out;
  }

  std::vector<WeatherRecord> records_;
};

/// Concatenate two series; `tail` must start the day after `head` ends.
inline WeatherSeries concat(const WeatherSeries& head, const WeatherSeries& tail) {
  std::vector<WeatherRecord> all(head.begin(), head.end());
  all.insert(all.end(), tail.begin(), tail.end());
  return WeatherSeries(std::move(all));
}

struct CaseRecord {
  Date week_start{};
  long count = 0;
  bool filled = false;  // inserted as zero for a missing week
};

/// Weekly reported case counts, 7-day spacing.
class CaseSeries {
 public:
  CaseSeries() = default;

  explicit CaseSeries(std::vector<CaseRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
      if (records_[i].count < 0)
        throw Error(Errc::NegativeCount, "week " + format_date(records_[i].week_start));
      if (i > 0 && days_between(records_[i - 1].week_start, records_[i].week_start) != 7)
        throw Error(Errc::NonWeeklySpacing, "week " + format_date(records_[i].week_start));
    }
  }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const CaseRecord& operator[](std::size_t i) const { return records_[i]; }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }
  const std::vector<CaseRecord>& records() const { return records_; }

  /// Weeks whose start falls in calendar year `y`.
  CaseSeries year(int y) const {
    std::vector<CaseRecord> out;
    for (const auto& r : records_)
      if (year_of(r.week_start) == y) out.push_back(r);
    return CaseSeries(std::move(out));
  }

  /// Weeks starting strictly before `date`.
  CaseSeries before(Date date) const {
    std::vector<CaseRecord> out;
    for (const auto& r : records_)
      if (r.week_start < date) out.push_back(r);
    return CaseSeries(std::move(out));
  }

  std::vector<double> counts() const {
    std::vector<double> out;
    for (const auto& r : records_) out.push_back(static_cast<double>(r.count));
    return out;
  }

 private:
  std::vector<CaseRecord> records_;
};

/// Week-midpoint convention used to sample daily model output for a weekly count.
inline Date week_midpoint(Date week_start) { return add_days(week_start, 3); }

}  // namespace spillcast
