#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "spillcast/ingest.hpp"
#include "spillcast/pipeline.hpp"
#include "../tools/synth.hpp"

using namespace spillcast;

namespace {

Grid2D box(std::size_t n, double mhi = 10.0, double whi = 10.0) { return Grid2D::span(0, mhi, 0, whi, n, n); }

RateSurface surface(Grid2D g) {
  RateSurface rs;
  rs.lambda = std::move(g);
  rs.bandwidth = {1, 1};
  return rs;
}

// posterior_x density at cell c, recomputed directly in long double
long double oracle_posterior(int x, const Grid2D& prior, const Grid2D& lambda, std::size_t c) {
  auto pmf = [](int k, long double l) {
    if (l == 0) return k == 0 ? 1.0L : 0.0L;
    return std::exp(-l + k * std::log(l) - std::lgamma(static_cast<long double>(k) + 1));
  };
  long double z = 0;
  for (std::size_t i = 0; i < prior.size(); ++i) z += prior.values[i] * pmf(x, lambda.values[i]);
  return prior.values[c] * pmf(x, lambda.values[c]) / (z * prior.cell_area());
}

int oracle_mpp(const Grid2D& prior, const Grid2D& lambda, std::size_t c, int x_max) {
  int best = 1;
  long double bd = oracle_posterior(1, prior, lambda, c);
  for (int x = 2; x <= x_max; ++x) {
    const long double d = oracle_posterior(x, prior, lambda, c);
    if (d > bd * (1 + static_cast<long double>(kMppTieTolerance))) {
      bd = d;
      best = x;
    }
  }
  return best;
}

Trajectory flat_trajectory(double m, int days) {
  Trajectory t;
  for (int i = 0; i < days; ++i) {
    t.dates.push_back(add_days(year_start(2022), i));
    t.mosquitoes.push_back(m);
    t.r0.push_back(1);
  }
  return t;
}

WeatherSeries flat_weather(double temp, int days, int year = 2022) {
  std::vector<WeatherRecord> recs;
  for (int i = 0; i < days; ++i) recs.push_back({add_days(year_start(year), i), temp, 60, 1, false});
  return WeatherSeries(recs);
}

}  // namespace

TEST(RateSurface, ConstantCounts) {
  std::vector<SeveritySample> s{{100, 20, 5}, {300, 22, 5}, {800, 25, 5}};
  const auto rs = fit_rate_surface(s, Bandwidth{200, 2});
  for (double v : rs.lambda.values)
    if (v != 0.0) EXPECT_NEAR(v, 5.0, 1e-12);
}

TEST(RateSurface, SingleSampleAtItsLocation) {
  const std::vector<SeveritySample> s{{400, 21, 7}};
  EXPECT_DOUBLE_EQ(nw_rate(s, {50, 1}, 400, 21), 7.0);
  EXPECT_THROW(fit_rate_surface(s, Bandwidth{50, 1}), Error);
}

TEST(RateSurface, TwoClusters) {
  std::vector<SeveritySample> s;
  for (int i = 0; i < 5; ++i) {
    s.push_back({100.0 + i, 20.0, 1});
    s.push_back({5000.0 + i, 28.0, 9});
  }
  const Bandwidth h{50, 0.5};
  // direct NW at the cluster centers
  auto direct = [&](double m, double w) {
    double num = 0, den = 0;
    for (const auto& x : s) {
      const double k = std::exp(-0.5 * (std::pow((m - x.m) / h.x, 2) + std::pow((w - x.w) / h.y, 2)));
      num += k * x.x;
      den += k;
    }
    return num / den;
  };
  EXPECT_NEAR(nw_rate(s, h, 102, 20), direct(102, 20), 1e-12);
  EXPECT_NEAR(nw_rate(s, h, 102, 20), 1.0, 0.05);
  EXPECT_NEAR(nw_rate(s, h, 5002, 28), 9.0, 0.05);
  const auto rs = fit_rate_surface(s, h);
  for (double v : rs.lambda.values) {
    EXPECT_GE(v, 0.0);
    if (v != 0.0) {
      EXPECT_GE(v, 1.0 - 1e-12);
      EXPECT_LE(v, 9.0 + 1e-12);
    }
  }
}

TEST(Poisson, Examples) {
  EXPECT_NEAR(poisson_pmf(0, 1.0), 0.367879441171442, 1e-12);
  EXPECT_NEAR(poisson_pmf(2, 2.0), 0.270670566473225, 1e-12);
  EXPECT_EQ(poisson_pmf(0, 0.0), 1.0);
  EXPECT_EQ(poisson_pmf(3, 0.0), 0.0);
  EXPECT_NEAR(poisson_pmf(25, 20.0), std::exp(-20 + 25 * std::log(20.0) - std::lgamma(26.0)), 1e-15);
}

TEST(Poisson, MassSumsToOne) {
  for (double lambda : {0.0, 0.3, 1.0, 7.5, 20.0, 33.3, 50.0}) {
    double s = 0.0;
    for (long x = 0; x <= 200; ++x) s += poisson_pmf(x, lambda);
    EXPECT_GT(s, 1.0 - 1e-9) << lambda;
  }
}

TEST(Prior, UniformBox) {
  const auto p = build_prior(PriorKind::uniform_box, {}, Grid2D::span(0, 4, 0, 5, 16, 16));
  for (double v : p.values) EXPECT_NEAR(v, 1.0 / 20.0, 1e-12);
  EXPECT_NEAR(p.mass(), 1.0, 1e-12);
}

TEST(Prior, RidgeAndBand) {
  const Grid2D g = box(64);
  const auto ridge = build_prior(PriorKind::gaussian_ridge, {{5, 5}}, g, 0.05);
  EXPECT_NEAR(ridge.mass(), 1.0, 1e-6);
  const auto peak = std::max_element(ridge.values.begin(), ridge.values.end()) - ridge.values.begin();
  const auto c = nearest_cell(g, 5, 5);
  EXPECT_EQ(ridge.values[static_cast<std::size_t>(peak)], ridge.at(c.i, c.j));

  const std::vector<CurvePoint> curve{{1, 1}, {3, 3}, {8, 2}};
  const auto band = build_prior(PriorKind::uniform_band, curve, g, 0.05, 0.0);
  EXPECT_NEAR(band.mass(), 1.0, 1e-9);
  std::size_t nonzero = 0;
  for (double v : band.values) nonzero += v > 0.0;
  EXPECT_EQ(nonzero, curve.size());
  for (const auto& p : curve) {
    const auto cell = nearest_cell(g, p.m, p.w);
    EXPECT_GT(band.at(cell.i, cell.j), 0.0);
  }
  EXPECT_THROW(build_prior(PriorKind::gaussian_ridge, {}, g), Error);
}

TEST(Posterior, ConstantLambdaIsUniform) {
  Grid2D l = box(16);
  std::fill(l.values.begin(), l.values.end(), 4.0);
  const auto prior = build_prior(PriorKind::uniform_box, {}, box(16));
  for (int x : {1, 4, 30}) {
    const auto p = posterior(x, prior, surface(l));
    for (double v : p.density.values) EXPECT_NEAR(v, 0.01, 1e-12);
  }
}

TEST(Posterior, ZeroCountPrefersZeroRate) {
  Grid2D l = box(16);
  for (std::size_t i = 0; i < l.nx; ++i)
    for (std::size_t j = 0; j < l.ny; ++j) l.at(i, j) = i < 8 ? 0.0 : 40.0;
  const auto p = posterior(0, build_prior(PriorKind::uniform_box, {}, box(16)), surface(l));
  double low = 0.0;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < l.ny; ++j) low += p.density.at(i, j) * p.density.cell_area();
  EXPECT_NEAR(low, 1.0, 1e-12);
}

TEST(Posterior, TwoValuedRatio) {
  Grid2D l = box(16);
  for (std::size_t i = 0; i < l.nx; ++i)
    for (std::size_t j = 0; j < l.ny; ++j) l.at(i, j) = i < 8 ? 1.0 : 9.0;
  const auto p = posterior(9, build_prior(PriorKind::uniform_box, {}, box(16)), surface(l));
  const double ratio = std::exp(-9.0) * std::pow(9.0, 9) / std::exp(-1.0);
  EXPECT_NEAR(p.density.at(12, 3) / p.density.at(2, 3), ratio, 1e-9 * ratio);
  // grid-normalized: 128 cells at each level, cell area 100/256
  const double a = 100.0 / 256.0, lo = 1.0 / (128 * a * (1 + ratio));
  EXPECT_NEAR(p.density.at(2, 3), lo, 1e-12);
  EXPECT_NEAR(p.density.mass(), 1.0, 1e-12);
}

TEST(Posterior, ZeroEvidence) {
  Grid2D l = box(8);
  std::fill(l.values.begin(), l.values.end(), 0.0);
  EXPECT_THROW(posterior(3, build_prior(PriorKind::uniform_box, {}, box(8)), surface(l)), Error);
}

TEST(Mpp, ConstantLambdaTiesToOne) {
  Grid2D l = box(16);
  std::fill(l.values.begin(), l.values.end(), 6.0);
  const auto posts = build_posteriors(build_prior(PriorKind::uniform_box, {}, box(16)), surface(l), 30);
  EXPECT_EQ(mpp_predict(5, 5, posts).x, 1);
}

TEST(Mpp, TwoRegionMatchesOracle) {
  Grid2D l = box(16);
  for (std::size_t i = 0; i < l.nx; ++i)
    for (std::size_t j = 0; j < l.ny; ++j) l.at(i, j) = i < 8 ? 1.0 : 9.0;
  const auto prior = build_prior(PriorKind::uniform_box, {}, box(16));
  const auto posts = build_posteriors(prior, surface(l), 30);
  const auto c = nearest_cell(l, 8.0, 5.0);
  EXPECT_EQ(mpp_predict(8.0, 5.0, posts).x, oracle_mpp(prior, l, c.i * l.ny + c.j, 30));
}

TEST(Mpp, BruteForceEquivalenceOnRandomGrids) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> lam(0.2, 12.0), pr(0.1, 1.0), u(0.0, 10.0);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 8 + static_cast<std::size_t>(rep) % 25;
    Grid2D l = box(n), prior = box(n);
    for (double& v : l.values) v = lam(rng);
    for (double& v : prior.values) v = pr(rng);
    const double m = prior.mass();
    for (double& v : prior.values) v /= m;
    const auto posts = build_posteriors(prior, surface(l), 10);
    for (const auto& p : posts) EXPECT_NEAR(p.density.mass(), 1.0, 1e-6);
    for (int k = 0; k < 25; ++k) {
      const double pm = u(rng), pw = u(rng);
      const auto c = nearest_cell(l, pm, pw);
      ASSERT_EQ(mpp_predict(pm, pw, posts).x, oracle_mpp(prior, l, c.i * l.ny + c.j, 10));
    }
  }
}

TEST(Mpp, PriorScaleInvariance) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lam(0.5, 10.0), u(0.0, 10.0);
  Grid2D l = box(24);
  for (double& v : l.values) v = lam(rng);
  const std::vector<CurvePoint> curve{{2, 2}, {5, 6}, {8, 7}};
  const auto prior = build_prior(PriorKind::gaussian_ridge, curve, box(24), 0.1);
  Grid2D scaled = prior;
  for (double& v : scaled.values) v *= 37.5;
  const auto a = build_posteriors(prior, surface(l), 10), b = build_posteriors(scaled, surface(l), 10);
  for (int k = 0; k < 200; ++k) {
    const double pm = u(rng), pw = u(rng);
    EXPECT_EQ(mpp_predict(pm, pw, a).x, mpp_predict(pm, pw, b).x);
  }
}

TEST(Mpp, OutsideGridIsClamped) {
  Grid2D l = box(8);
  std::fill(l.values.begin(), l.values.end(), 2.0);
  const auto posts = build_posteriors(build_prior(PriorKind::uniform_box, {}, box(8)), surface(l), 5);
  EXPECT_TRUE(mpp_predict(-4, 50, posts).clamped);
  EXPECT_FALSE(mpp_predict(4, 4, posts).clamped);
}

TEST(EstimateSeverity, ConstantAndEmpty) {
  Grid2D l = box(16, 1000, 40);
  for (std::size_t i = 0; i < l.nx; ++i)
    for (std::size_t j = 0; j < l.ny; ++j) l.at(i, j) = 1.0 + 0.5 * static_cast<double>(i + j);
  const auto posts = build_posteriors(build_prior(PriorKind::uniform_box, {}, l), surface(l), 10);
  const auto est = estimate_severity(flat_trajectory(420, 30), flat_weather(21, 30), posts, {1, 0, 0});
  ASSERT_EQ(est.size(), 30u);
  for (const auto& d : est) EXPECT_EQ(d.predicted, est.front().predicted);
  EXPECT_TRUE(estimate_severity(Trajectory{}, flat_weather(21, 30), posts, {1, 0, 0}).empty());
  std::vector<bool> gate(30, false);
  for (const auto& d : estimate_severity(flat_trajectory(420, 30), flat_weather(21, 30), posts, {1, 0, 0}, &gate))
    EXPECT_EQ(d.predicted, 0);
}

// Cases drawn from a known surface with peak 10 along one simulated season.
TEST(EstimateSeverity, SyntheticPeakRecovery) {
  const Config cfg;
  const auto w = synth::weather({}, 2021, 1, 3);
  const auto t = simulate(cfg.model, w, std::vector<double>(w.size(), 6000.0), cfg.init.to_state());
  const double mmax = *std::max_element(t.mosquitoes.begin(), t.mosquitoes.end());
  auto lambda = [&](double m, double temp) {
    return 10.0 * std::exp(-0.5 * std::pow((m - mmax) / (0.3 * mmax), 2) - 0.5 * std::pow((temp - 24.0) / 3.0, 2));
  };
  std::mt19937_64 rng(3);
  std::vector<SeveritySample> s;
  std::size_t peak = 0;
  for (int rep = 0; rep < 3; ++rep)
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double l = lambda(t.mosquitoes[i], w[i].temp_mean);
      if (l > lambda(t.mosquitoes[peak], w[peak].temp_mean)) peak = i;
      std::poisson_distribution<long> pois(std::max(l, 1e-12));
      const long x = pois(rng);
      if (x >= 1) s.push_back({t.mosquitoes[i], w[i].temp_mean, static_cast<double>(x)});
    }
  const auto rs = fit_rate_surface(s, std::nullopt);
  const auto posts = build_posteriors(build_prior(PriorKind::uniform_box, {}, rs.lambda), rs, cfg.x_max);
  const auto est = estimate_severity(t, w, posts, cfg.w_coeffs);
  EXPECT_NEAR(est[peak].predicted, 10, 3) << "peak day " << format_date(t.dates[peak]);
}

TEST(PredictSeverity, LeadZeroShortIsEmpty) {
  const auto w = synth::weather({}, 2020, 2, 1);
  PlaneModel plane;
  plane.edges = {0.0, 1e9};
  plane.bins = {{0, 0, 6000, 10, true}};
  const auto run = forecast_short(w, w, plane, Config{}, 0);
  EXPECT_TRUE(run.traj.dates.empty());
}

TEST(PredictSeverity, ConstantWorldLongAndShortAgree) {
  Config cfg;
  const auto hist = flat_weather(24, 366 + 2 * 365, 2019);
  const auto actual = flat_weather(24, 365, 2022);
  PlaneModel plane;
  plane.edges = {0.0, 1e9};
  plane.bins = {{0, 0, 6000, 10, true}};
  std::vector<SeveritySample> s;
  for (int i = 0; i < 40; ++i) s.push_back({100.0 * i, 20.0 + 0.2 * i, 1.0 + i % 7});
  const auto rs = fit_rate_surface(s, std::nullopt);
  const auto lr = forecast_long(hist, plane, cfg, 365);
  const auto sr = forecast_short(hist, actual, plane, cfg, 14);
  const auto a = severity_for_run(lr, rs, cfg), b = severity_for_run(sr, rs, cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE(std::abs(a[i].predicted - b[i].predicted), 1);
}

TEST(PredictSeverity, SeasonalWeeklyTotalsCorrelate) {
  const Config cfg;
  const auto train = load_weather(SPILLCAST_DATA_DIR "/weather_train.csv");
  const auto cases = load_cases(SPILLCAST_DATA_DIR "/cases_train.csv");
  const auto target = load_weather(SPILLCAST_DATA_DIR "/weather_target.csv");
  const auto fit = fit_history(train, cases, cfg);
  const auto rs = fit_severity(fit, train, cases, cfg);
  const auto run = forecast_long(train, fit.plane, cfg, static_cast<int>(target.size()));
  const auto sev = severity_for_run(run, rs, cfg);
  // generator: the target year simulated with its true capacity
  const auto truth = simulate(cfg.model, target, std::vector<double>(target.size(), 6000.0), cfg.init.to_state());
  std::vector<double> pred, gen;
  for (Date wk = year_start(2022); add_days(wk, 6) < year_start(2023); wk = add_days(wk, 7)) {
    double p = 0.0;
    for (const auto& d : sev)
      if (d.date >= wk && d.date <= add_days(wk, 6)) p += d.predicted;
    pred.push_back(p);
    gen.push_back(weekly_expected_cases(truth, wk));
  }
  const double n = static_cast<double>(pred.size());
  const double mp = std::accumulate(pred.begin(), pred.end(), 0.0) / n, mg = std::accumulate(gen.begin(), gen.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sxy += (pred[i] - mp) * (gen[i] - mg);
    sxx += (pred[i] - mp) * (pred[i] - mp);
    syy += (gen[i] - mg) * (gen[i] - mg);
  }
  EXPECT_GT(sxy / std::sqrt(sxx * syy), 0.7);
}

TEST(SeverityModel, RoundTrip) {
  std::vector<SeveritySample> s;
  for (int i = 0; i < 12; ++i) s.push_back({50.0 * i, 18.0 + 0.5 * i, 1.0 + i % 4});
  const auto rs = fit_rate_surface(s, std::nullopt, std::nullopt, 32);
  std::vector<std::string> lines;
  std::istringstream ss(format_severity_model(rs));
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  const auto back = parse_severity_model(lines);
  ASSERT_TRUE(back.lambda.same_shape(rs.lambda));
  for (std::size_t c = 0; c < rs.lambda.size(); ++c) EXPECT_NEAR(back.lambda.values[c], rs.lambda.values[c], 1e-9);
}
