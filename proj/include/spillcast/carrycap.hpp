#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spillcast/date.hpp"
#include "spillcast/epimodel.hpp"
#include "spillcast/error.hpp"
#include "spillcast/io.hpp"
#include "spillcast/series.hpp"
#include "spillcast/weathercast.hpp"

namespace spillcast {

/// Daily aquatic carrying capacity aligned to a weather series.
struct KSeries {
  std::vector<Date> dates;
  std::vector<double> k;
  std::vector<bool> flagged;  // fallback bin or clamp used (plane prediction only)

  std::size_t size() const { return dates.size(); }
  bool empty() const { return dates.empty(); }

  KSeries year(int y) const {
    KSeries out;
    for (std::size_t i = 0; i < dates.size(); ++i)
      if (year_of(dates[i]) == y) {
        out.dates.push_back(dates[i]);
        out.k.push_back(k[i]);
        out.flagged.push_back(flagged.empty() ? false : flagged[i]);
      }
    return out;
  }

  std::vector<int> years() const {
    std::vector<int> out;
    for (Date d : dates)
      if (out.empty() || out.back() != year_of(d)) out.push_back(year_of(d));
    return out;
  }
};

inline void require_aligned(const KSeries& ks, const WeatherSeries& w) {
  if (ks.size() != w.size()) throw Error(Errc::LengthMismatch, "K series and weather differ in length");
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (ks.dates[i] != w[i].date) throw Error(Errc::LengthMismatch, "K series misaligned at " + format_date(ks.dates[i]));
}

inline std::string format_kseries(const KSeries& ks) {
  std::ostringstream out;
  out << "date,K\n";
  for (std::size_t i = 0; i < ks.size(); ++i) out << format_date(ks.dates[i]) << ',' << io::fmt(ks.k[i]) << '\n';
  return out.str();
}

inline KSeries parse_kseries(const std::vector<std::string>& lines) {
  if (lines.empty() || io::trim(lines[0]) != "date,K") throw Error(Errc::ParseError, "line 1: expected header date,K");
  KSeries ks;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (io::trim(lines[i]).empty()) continue;
    const auto f = io::split(lines[i]);
    const auto d = f.size() == 2 ? parse_date(f[0]) : std::nullopt;
    const auto v = f.size() == 2 ? io::parse_double(f[1]) : std::nullopt;
    if (!d || !v) throw Error(Errc::ParseError, "line " + std::to_string(i + 1));
    if (!(*v >= 0.0)) throw Error(Errc::RangeViolation, "K, line " + std::to_string(i + 1));
    if (!ks.dates.empty() && days_between(ks.dates.back(), *d) != 1)
      throw Error(Errc::ParseError, "line " + std::to_string(i + 1) + ": K dates not contiguous");
    ks.dates.push_back(*d);
    ks.k.push_back(*v);
    ks.flagged.push_back(false);
  }
  return ks;
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

/// Observed count for the week starting at `week_start`; weeks absent from the
/// series count as zero.
inline double observed_week(const CaseSeries& cases, Date week_start) {
  for (const auto& r : cases)
    if (r.week_start == week_start) return static_cast<double>(r.count);
  return 0.0;
}

/// Week starts covering [first, last] in phase with the case series (or with
/// `first` when there are no cases).
inline std::vector<Date> week_starts_in(Date first, Date last, const CaseSeries& cases) {
  Date anchor = cases.empty() ? first : cases[0].week_start;
  long offset = days_between(anchor, first);
  long shift = ((offset % 7) + 7) % 7;
  Date start = add_days(first, -shift);
  if (start < first) start = add_days(start, 7);
  std::vector<Date> out;
  for (Date d = start; d <= last; d = add_days(d, 7)) out.push_back(d);
  return out;
}

/// Per calendar year, the grid level whose simulated weekly expected reported
/// cases best match the observed counts in squared error (ties: smaller K).
inline KSeries calibrate_K(const WeatherSeries& weather, const CaseSeries& cases, const ModelParams& params,
                           std::vector<double> grid, const CompartmentState& init) {
  if (grid.empty()) throw Error(Errc::InsufficientData, "empty K grid");
  if (weather.size() < 365) throw Error(Errc::InsufficientData, "calibration needs at least one full year");
  std::sort(grid.begin(), grid.end());

  KSeries out;
  for (int y : weather.years()) {
    const WeatherSeries w = weather.year(y);
    const auto weeks = week_starts_in(w.first_date(), w.last_date(), cases);
    std::vector<double> observed;
    for (Date wk : weeks) observed.push_back(observed_week(cases, wk));

    double best_k = grid.front();
    double best_err = std::numeric_limits<double>::infinity();
    for (double level : grid) {
      const std::vector<double> cap(w.size(), level);
      const Trajectory traj = simulate(params, w, cap, init);
      double err = 0.0;
      for (std::size_t i = 0; i < weeks.size(); ++i) {
        const double diff = weekly_expected_cases(traj, weeks[i]) - observed[i];
        err += diff * diff;
      }
      if (err < best_err) {
        best_err = err;
        best_k = level;
      }
    }
    for (const auto& r : w) {
      out.dates.push_back(r.date);
      out.k.push_back(best_k);
      out.flagged.push_back(false);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prediction: multi-year mean, autoregression, plane per precipitation bin
// ---------------------------------------------------------------------------

/// Day-of-year mean across the historical years, laid onto `target_dates`.
/// Feb 29 uses the leap years available, else falls back to Feb 28.
inline KSeries predict_K_mean(const KSeries& history, const std::vector<Date>& target_dates) {
  if (history.empty()) throw Error(Errc::EmptyHistory, "no historical K");
  std::array<double, 366> sum{};
  std::array<int, 366> count{};
  for (std::size_t i = 0; i < history.size(); ++i) {
    const int idx = leap_calendar_index(history.dates[i]);
    sum[idx] += history.k[i];
    ++count[idx];
  }
  constexpr int kFeb28 = 58, kFeb29 = 59;
  KSeries out;
  for (Date d : target_dates) {
    int idx = leap_calendar_index(d);
    if (count[idx] == 0 && idx == kFeb29) idx = kFeb28;
    if (count[idx] == 0) throw Error(Errc::EmptyHistory, "no history for day " + format_date(d));
    out.dates.push_back(d);
    out.k.push_back(sum[idx] / count[idx]);
    out.flagged.push_back(false);
  }
  return out;
}

/// AR forecast of K for `lead` days after the history ends (clamped at 0, flagged).
inline KSeries predict_K_ar(const KSeries& history, int lead, int order) {
  KSeries out;
  if (lead <= 0) return out;
  if (history.size() <= static_cast<std::size_t>(order))
    throw Error(Errc::TooShort, "K history must be longer than the AR order");
  const std::vector<double> f = forecast(fit_ar(history.k, order), history.k, lead);
  for (int i = 0; i < lead; ++i) {
    const double v = f[static_cast<std::size_t>(i)];
    out.dates.push_back(add_days(history.dates.back(), i + 1));
    out.k.push_back(std::max(v, 0.0));
    out.flagged.push_back(v < 0.0);
  }
  return out;
}

/// Smallest capacity handed to the simulator; a predicted K of 0 would empty
/// the aquatic stage's logistic term.
inline constexpr double kMinCapacity = 1.0;

inline std::vector<double> simulation_capacity(const KSeries& ks) {
  std::vector<double> out;
  out.reserve(ks.size());
  for (double k : ks.k) out.push_back(std::max(k, kMinCapacity));
  return out;
}

struct PlaneSample {
  double temp, humidity, precip, k;
};

struct PlaneBin {
  double a = 0.0, b = 0.0, c = 0.0;  // K = a*T + b*H + c
  std::size_t samples = 0;
  bool usable = false;
};

/// Per-precipitation-bin planes. Bin i covers [edges[i], edges[i+1]); the last
/// bin is closed on the right.
struct PlaneModel {
  std::vector<double> edges;
  std::vector<PlaneBin> bins;
};

inline constexpr std::size_t kMinPlaneSamples = 3;

/// Precipitation edges at equally spaced quantiles; duplicate edges collapse.
inline std::vector<double> quantile_edges(std::vector<double> precip, int bins) {
  if (precip.empty() || bins < 1) throw Error(Errc::InsufficientData, "no precipitation samples");
  std::sort(precip.begin(), precip.end());
  std::vector<double> edges{precip.front()};
  for (int i = 1; i < bins; ++i) {
    const double q = static_cast<double>(i) / bins * static_cast<double>(precip.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(q));
    const auto hi = std::min(lo + 1, precip.size() - 1);
    const double v = precip[lo] + (q - static_cast<double>(lo)) * (precip[hi] - precip[lo]);
    if (v > edges.back()) edges.push_back(v);
  }
  if (precip.back() > edges.back()) edges.push_back(precip.back());
  else if (edges.size() == 1) edges.push_back(edges.back());
  return edges;
}

/// Bin index for `precip`, or -1 when outside [edges.front(), edges.back()].
inline int precip_bin(const std::vector<double>& edges, double precip) {
  const int nbins = static_cast<int>(edges.size()) - 1;
  if (nbins < 1 || precip < edges.front() || precip > edges.back()) return -1;
  for (int i = 0; i < nbins; ++i)
    if (precip < edges[static_cast<std::size_t>(i) + 1]) return i;
  return nbins - 1;
}

inline PlaneModel fit_plane(const std::vector<PlaneSample>& samples, const std::vector<double>& edges) {
  if (edges.size() < 2) throw Error(Errc::InvariantViolation, "need at least two precipitation edges");
  PlaneModel model;
  model.edges = edges;
  model.bins.resize(edges.size() - 1);
  std::vector<std::vector<const PlaneSample*>> members(model.bins.size());
  for (const auto& s : samples) {
    const int b = precip_bin(edges, s.precip);
    if (b >= 0) members[static_cast<std::size_t>(b)].push_back(&s);
  }
  for (std::size_t b = 0; b < model.bins.size(); ++b) {
    PlaneBin& bin = model.bins[b];
    bin.samples = members[b].size();
    if (bin.samples < kMinPlaneSamples) continue;
    Eigen::MatrixXd A(bin.samples, 3);
    Eigen::VectorXd y(bin.samples);
    for (std::size_t i = 0; i < bin.samples; ++i) {
      A(i, 0) = members[b][i]->temp;
      A(i, 1) = members[b][i]->humidity;
      A(i, 2) = 1.0;
      y(i) = members[b][i]->k;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw Error(Errc::DegenerateBin, "precipitation bin " + std::to_string(b));
    const Eigen::Vector3d coef = qr.solve(y);
    bin.a = coef(0);
    bin.b = coef(1);
    bin.c = coef(2);
    bin.usable = true;
  }
  return model;
}

/// K_t from the plane of the bin holding P_t. Out-of-range or unusable bins
/// fall back to the nearest usable bin; fallbacks and zero clamps are flagged.
inline KSeries predict_K_plane(const PlaneModel& model, const WeatherSeries& forecast_weather) {
  std::vector<int> usable;
  for (std::size_t b = 0; b < model.bins.size(); ++b)
    if (model.bins[b].usable) usable.push_back(static_cast<int>(b));
  if (usable.empty()) throw Error(Errc::NoUsableBin, "plane model has no usable bin");

  auto distance = [&](int b, double p) {
    const double lo = model.edges[static_cast<std::size_t>(b)], hi = model.edges[static_cast<std::size_t>(b) + 1];
    return p < lo ? lo - p : (p > hi ? p - hi : 0.0);
  };

  KSeries out;
  for (const auto& r : forecast_weather) {
    int b = precip_bin(model.edges, r.precip);
    bool flag = false;
    if (b < 0 || !model.bins[static_cast<std::size_t>(b)].usable) {
      flag = true;
      b = usable.front();
      for (int u : usable)
        if (distance(u, r.precip) < distance(b, r.precip)) b = u;
    }
    const PlaneBin& bin = model.bins[static_cast<std::size_t>(b)];
    double k = bin.a * r.temp_mean + bin.b * r.humidity + bin.c;
    if (k < 0.0) {
      k = 0.0;
      flag = true;
    }
    out.dates.push_back(r.date);
    out.k.push_back(k);
    out.flagged.push_back(flag);
  }
  return out;
}

/// Paired (T, H, P, K) samples from aligned weather and K series.
inline std::vector<PlaneSample> plane_samples(const WeatherSeries& w, const KSeries& ks) {
  require_aligned(ks, w);
  std::vector<PlaneSample> out;
  for (std::size_t i = 0; i < w.size(); ++i) out.push_back({w[i].temp_mean, w[i].humidity, w[i].precip, ks.k[i]});
  return out;
}

inline std::string format_plane(const PlaneModel& m) {
  std::ostringstream out;
  out << "[plane]\nversion = 1\nedges = ";
  for (std::size_t i = 0; i < m.edges.size(); ++i) out << (i ? "," : "") << io::fmt(m.edges[i]);
  out << "\n[bins]\nbin,a,b,c,samples,usable\n";
  for (std::size_t b = 0; b < m.bins.size(); ++b) {
    const auto& bin = m.bins[b];
    out << b << ',' << io::fmt(bin.a) << ',' << io::fmt(bin.b) << ',' << io::fmt(bin.c) << ',' << bin.samples << ','
        << (bin.usable ? 1 : 0) << '\n';
  }
  return out.str();
}

inline PlaneModel parse_plane(const std::vector<std::string>& lines) {
  PlaneModel m;
  bool in_bins = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = io::trim(lines[i]);
    if (line.empty() || line == "[plane]" || line.starts_with("version") || line.starts_with("bin,")) continue;
    if (line == "[bins]") {
      in_bins = true;
      continue;
    }
    const std::string where = "plane model line " + std::to_string(i + 1);
    if (!in_bins) {
      if (!line.starts_with("edges")) throw Error(Errc::ParseError, where);
      for (auto tok : io::split(io::trim(line.substr(line.find('=') + 1)))) {
        auto v = io::parse_double(tok);
        if (!v) throw Error(Errc::ParseError, where);
        m.edges.push_back(*v);
      }
      continue;
    }
    const auto f = io::split(line);
    if (f.size() != 6) throw Error(Errc::ParseError, where);
    auto a = io::parse_double(f[1]), b = io::parse_double(f[2]), c = io::parse_double(f[3]);
    auto n = io::parse_long(f[4]), u = io::parse_long(f[5]);
    if (!a || !b || !c || !n || !u) throw Error(Errc::ParseError, where);
    m.bins.push_back({*a, *b, *c, static_cast<std::size_t>(*n), *u != 0});
  }
  if (m.edges.size() < 2 || m.bins.size() != m.edges.size() - 1) throw Error(Errc::ParseError, "plane model shape");
  return m;
}

}  // namespace spillcast
