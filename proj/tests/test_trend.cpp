#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spillcast/config.hpp"
#include "spillcast/trend.hpp"
#include "../tools/synth.hpp"

using namespace spillcast;

namespace {

RiskSeries series_of(int high, int risky, int low, int green) {
  RiskSeries s;
  Date d = year_start(2021);
  auto add = [&](int n, RiskLevel l) {
    for (int i = 0; i < n; ++i, d = add_days(d, 1)) s.days.push_back({d, 0, 0, l});
  };
  add(high, RiskLevel::high);
  add(risky, RiskLevel::risky);
  add(low, RiskLevel::low);
  add(green, RiskLevel::green);
  return s;
}

// Cramer's rule on the 2x2 normal equations, raw (uncentered) years.
std::pair<double, double> normal_equations(const std::vector<double>& t, const std::vector<double>& y) {
  long double s1 = 0, st = 0, stt = 0, sy = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    s1 += 1;
    st += t[i];
    stt += static_cast<long double>(t[i]) * t[i];
    sy += y[i];
    sty += static_cast<long double>(t[i]) * y[i];
  }
  const long double det = s1 * stt - st * st;
  return {static_cast<double>((s1 * sty - st * sy) / det), static_cast<double>((stt * sy - st * sty) / det)};
}

PlaneModel flat_plane(double k) {
  PlaneModel p;
  p.edges = {0.0, 1e9};
  p.bins = {{0, 0, k, 10, true}};
  return p;
}

// Onset samples from a season one degree warmer than the baseline climate.
OnsetPdf warm_season_pdf(const Config& cfg) {
  synth::Climate hot;
  hot.temp_mean += 1.0;
  const auto w = synth::weather(hot, 2000, 1, 1);
  const auto t = simulate(cfg.model, w, std::vector<double>(w.size(), 6000.0), cfg.init.to_state());
  std::vector<OnsetSample> s;
  for (std::size_t d = 170; d <= 230; d += 15) s.push_back({t.mosquitoes[d], t.r0[d], 1});
  return fit_onset_pdf(s, std::nullopt);
}

}  // namespace

TEST(Indicators, Examples) {
  const auto a = annual_indicators(series_of(73, 0, 0, 292));
  EXPECT_DOUBLE_EQ(a.r_year, 0.2);
  const auto g = annual_indicators(series_of(0, 0, 0, 365));
  EXPECT_EQ(g.r_year, 0.0);
  EXPECT_EQ(g.r_relative, 0.0);
  EXPECT_DOUBLE_EQ(annual_indicators(series_of(10, 10, 0, 345)).r_relative, 0.5);
  EXPECT_THROW(annual_indicators(RiskSeries{}), Error);
}

TEST(Indicators, BoundsAndInclusion) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> u(0, 120);
  for (int k = 0; k < 50; ++k) {
    const int h = u(rng), r = u(rng), l = u(rng);
    const auto a = annual_indicators(series_of(h, r, l, 365 - h - r - l > 0 ? 365 - h - r - l : 0));
    EXPECT_GE(a.r_year, 0.0);
    EXPECT_LE(a.r_year, 1.0);
    EXPECT_GE(a.r_relative, 0.0);
    EXPECT_LE(a.r_relative, 1.0);
    if (h >= 1) EXPECT_GE(a.r_relative, a.r_year);
  }
}

TEST(Ols, ClosedFormOracle) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z(0, 0.05);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> t, y;
    for (int i = 0; i < 12 + rep; ++i) {
      t.push_back(1991 + i);
      y.push_back(0.3 - 0.004 * i + z(rng));
    }
    const auto r = ols_trend(t, y);
    const auto [slope, intercept] = normal_equations(t, y);
    EXPECT_NEAR(r.slope, slope, 1e-10);
    EXPECT_NEAR(r.intercept, intercept, 1e-10 * std::max(1.0, std::abs(intercept)));
  }
}

TEST(Ols, ExactAndConstant) {
  const auto e = ols_trend({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_NEAR(e.slope, 2.0, 1e-12);
  EXPECT_NEAR(e.intercept, 1.0, 1e-12);
  EXPECT_NEAR(e.slope_se, 0.0, 1e-12);
  EXPECT_LT(e.p_value, 1e-6);
  const auto c = ols_trend({2000, 2001, 2002, 2003}, {0.4, 0.4, 0.4, 0.4});
  EXPECT_EQ(c.slope, 0.0);
  EXPECT_EQ(c.p_value, 1.0);
}

TEST(Ols, Errors) {
  EXPECT_THROW(ols_trend({1, 2}, {1, 2}), Error);
  try {
    ols_trend({5, 5, 5}, {1, 2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroVariance);
  }
}

TEST(Ols, SyntheticSlope) {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> z(0, 0.01);
  std::vector<double> t, y;
  for (int i = 0; i < 33; ++i) {
    t.push_back(i);
    y.push_back(0.002 * i + 0.22 + z(rng));
  }
  const auto r = ols_trend(t, y);
  EXPECT_GE(r.slope, 0.001);
  EXPECT_LE(r.slope, 0.003);
  EXPECT_LT(r.p_value, 0.05);
  EXPECT_NEAR(r.slope, normal_equations(t, y).first, 1e-10);
}

TEST(Ks, ThreePointStatistic) {
  // mean 0, sample SD 1: sup difference is 1/3 - Phi(-1)
  const double phi = 0.5 * std::erfc(1.0 / std::sqrt(2.0));
  EXPECT_NEAR(ks_statistic({-1, 0, 1}), 1.0 / 3.0 - phi, 1e-12);
}

TEST(Ks, NormalSampleNotRejected) {
  std::mt19937_64 rng(200);
  std::normal_distribution<double> z(0, 1);
  std::vector<double> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(z(rng));
  EXPECT_GT(ks_normality(xs), 0.05);
}

TEST(Ks, UniformSampleRejected) {
  std::mt19937_64 rng(500);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> xs;
  for (int i = 0; i < 500; ++i) xs.push_back(u(rng) - 0.5);
  EXPECT_LT(ks_normality(xs), 0.05);
}

TEST(Ks, MonotoneAndErrors) {
  double prev = 2.0;
  for (double t = 0.0; t <= 3.0; t += 0.05) {
    const double q = kolmogorov_q(t);
    EXPECT_LE(q, prev);
    EXPECT_GE(q, 0.0);
    prev = q;
  }
  EXPECT_NEAR(kolmogorov_q(1.36), 0.049, 1e-3);
  EXPECT_THROW(ks_normality({1, 2, 3, 4}), Error);
}

TEST(TrendReport, AllGreenGivesZeroSlope) {
  const Config cfg;
  const auto pdf = fit_onset_pdf({{1e9, 1e6, 1}, {2e9, 2e6, 1}}, std::nullopt);
  const auto w = synth::weather({}, 2001, 12, 1);
  const auto rep = trend_report(w, pdf, cfg.model, flat_plane(6000), cfg.init.to_state());
  EXPECT_EQ(rep.years.size(), 12u);
  EXPECT_EQ(rep.r_year.slope, 0.0);
  EXPECT_EQ(rep.r_relative.slope, 0.0);
}

TEST(TrendReport, StationaryAndWarming) {
  const Config cfg;
  const auto pdf = warm_season_pdf(cfg);
  synth::Climate still;
  still.noise_sd = 0.4;
  const auto base = trend_report(synth::weather(still, 1991, 30, 5), pdf, cfg.model, flat_plane(6000), cfg.init.to_state());
  ASSERT_EQ(base.years.size(), 30u);
  EXPECT_GT(base.r_year.p_value, 0.1);

  synth::Climate warming = still;
  warming.warming_per_year = 0.05;
  const auto warm = trend_report(synth::weather(warming, 1991, 30, 5), pdf, cfg.model, flat_plane(6000), cfg.init.to_state());
  EXPECT_GT(warm.r_year.slope, 0.0);
  EXPECT_LT(warm.r_year.p_value, 0.05);

  // indicator recomputation from an independently classified year
  const auto y0 = synth::weather(warming, 1991, 30, 5).year(2005);
  const auto traj = simulate(cfg.model, y0, std::vector<double>(y0.size(), 6000.0), cfg.init.to_state());
  int high = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) high += classify(pdf, traj.mosquitoes[i], traj.r0[i]) == RiskLevel::high;
  EXPECT_DOUBLE_EQ(warm.years[14].ind.r_year, static_cast<double>(high) / static_cast<double>(y0.size()));

  // order-free regression
  std::vector<double> t, v;
  for (auto it = warm.years.rbegin(); it != warm.years.rend(); ++it) {
    t.push_back(it->year);
    v.push_back(it->ind.r_year);
  }
  const auto rev = ols_trend(t, v);
  EXPECT_NEAR(rev.slope, warm.r_year.slope, 1e-12);
  EXPECT_NEAR(rev.p_value, warm.r_year.p_value, 1e-12);
}

TEST(TrendReport, TooFewYears) {
  const Config cfg;
  const auto pdf = fit_onset_pdf({{1e9, 1e6, 1}, {2e9, 2e6, 1}}, std::nullopt);
  EXPECT_THROW(trend_report(synth::weather({}, 2001, 5, 1), pdf, cfg.model, flat_plane(6000), cfg.init.to_state()), Error);
}

TEST(TrendFormat, OneRowPerYear) {
  TrendReport rep;
  for (int y = 2000; y < 2004; ++y) rep.years.push_back({y, {0.1, 0.2}});
  const auto s = format_trend(rep);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 5);
  EXPECT_EQ(s.substr(0, 22), "year,r_year,r_relative");
}
