#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "spillcast/carrycap.hpp"
#include "spillcast/config.hpp"
#include "spillcast/epimodel.hpp"
#include "spillcast/error.hpp"
#include "spillcast/io.hpp"
#include "spillcast/onset.hpp"
#include "spillcast/series.hpp"

namespace spillcast {

struct AnnualIndicators {
  double r_year = 0.0;
  double r_relative = 0.0;
};

inline AnnualIndicators annual_indicators(const RiskSeries& risk) {
  if (risk.days.empty()) throw Error(Errc::EmptyYear, "no days");
  const auto c = risk.counts();
  const double high = c[3], risky_days = c[3] + c[2] + c[1];
  return {high / static_cast<double>(risk.days.size()), risky_days > 0 ? high / risky_days : 0.0};
}

struct TrendResult {
  double slope = 0.0;
  double intercept = 0.0;  // at year 0, as in y = slope * t + intercept
  double slope_se = 0.0;
  double p_value = 1.0;
  std::vector<double> residuals;
  double ks_p_value = 1.0;
};

/// OLS on centered years; t-distribution inference with n-2 df.
inline TrendResult ols_trend(const std::vector<double>& years, const std::vector<double>& values) {
  if (years.size() != values.size()) throw Error(Errc::LengthMismatch, "years vs values");
  std::vector<double> distinct = years;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (years.size() < 3) throw Error(Errc::TooFewYears, std::to_string(years.size()) + " years");
  if (distinct.size() == 1) throw Error(Errc::ZeroVariance, "all years identical");
  if (distinct.size() < 3) throw Error(Errc::TooFewYears, std::to_string(distinct.size()) + " distinct years");

  const double n = static_cast<double>(years.size());
  double tbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < years.size(); ++i) {
    tbar += years[i];
    ybar += values[i];
  }
  tbar /= n;
  ybar /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < years.size(); ++i) {
    sxx += (years[i] - tbar) * (years[i] - tbar);
    sxy += (years[i] - tbar) * (values[i] - ybar);
  }
  TrendResult r;
  r.slope = sxy / sxx;
  r.intercept = ybar - r.slope * tbar;
  double sse = 0.0;
  for (std::size_t i = 0; i < years.size(); ++i) {
    const double e = values[i] - (ybar + r.slope * (years[i] - tbar));
    r.residuals.push_back(e);
    sse += e * e;
  }
  const double dof = n - 2.0;
  r.slope_se = std::sqrt(sse / dof / sxx);
  if (r.slope_se == 0.0) {
    r.p_value = r.slope == 0.0 ? 1.0 : 0.0;
  } else {
    const boost::math::students_t dist(dof);
    r.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.slope / r.slope_se))), 0.0, 1.0);
  }
  return r;
}

/// Sup distance between the empirical CDF and a normal with the sample
/// mean and SD plugged in.
inline double ks_statistic(std::vector<double> xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / (n - 1.0));
  if (!(sd > 0.0)) return 1.0;
  std::sort(xs.begin(), xs.end());
  const boost::math::normal dist(mean, sd);
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = boost::math::cdf(dist, xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic Kolmogorov tail Q(t) = 2 sum_k (-1)^(k-1) exp(-2 k^2 t^2).
inline double kolmogorov_q(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;  // series converges slowly; Q is 1 to double precision here
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

inline double ks_normality(const std::vector<double>& residuals) {
  if (residuals.size() < 5) throw Error(Errc::TooFewResiduals, std::to_string(residuals.size()));
  return kolmogorov_q(std::sqrt(static_cast<double>(residuals.size())) * ks_statistic(residuals));
}

struct YearIndicators {
  int year = 0;
  AnnualIndicators ind;
};

struct TrendReport {
  std::vector<YearIndicators> years;
  TrendResult r_year;
  TrendResult r_relative;
};

/// Per calendar year: plane K, simulate from `init`, classify, indicators;
/// then an OLS trend on each indicator. Partial years are skipped.
inline TrendReport trend_report(const WeatherSeries& archive, const OnsetPdf& pdf, const ModelParams& params,
                                const PlaneModel& plane, const CompartmentState& init) {
  TrendReport rep;
  for (int y : archive.years()) {
    const WeatherSeries w = archive.year(y);
    if (static_cast<int>(w.size()) != days_in_year(y)) continue;
    const KSeries k = predict_K_plane(plane, w);
    const Trajectory traj = simulate(params, w, simulation_capacity(k), init);
    rep.years.push_back({y, annual_indicators(forecast_onset(pdf, traj))});
  }
  if (rep.years.size() < 10) throw Error(Errc::TooFewYears, "trend needs at least 10 full years of weather");
  std::vector<double> t, a, b;
  for (const auto& yi : rep.years) {
    t.push_back(yi.year);
    a.push_back(yi.ind.r_year);
    b.push_back(yi.ind.r_relative);
  }
  for (auto [res, vals] : {std::pair{&rep.r_year, &a}, {&rep.r_relative, &b}}) {
    *res = ols_trend(t, *vals);
    res->ks_p_value = ks_normality(res->residuals);
  }
  return rep;
}

inline std::string format_trend(const TrendReport& rep) {
  std::ostringstream out;
  out << "year,r_year,r_relative\n";
  for (const auto& y : rep.years) out << y.year << ',' << io::fmt(y.ind.r_year) << ',' << io::fmt(y.ind.r_relative) << '\n';
  return out.str();
}

}  // namespace spillcast
