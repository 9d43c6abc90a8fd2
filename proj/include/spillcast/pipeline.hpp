#pragma once

#include <algorithm>
#include <vector>

#include "spillcast/carrycap.hpp"
#include "spillcast/config.hpp"
#include "spillcast/epimodel.hpp"
#include "spillcast/onset.hpp"
#include "spillcast/series.hpp"
#include "spillcast/severity.hpp"
#include "spillcast/weathercast.hpp"

namespace spillcast {

struct HistoryFit {
  KSeries k;  // calibrated
  PlaneModel plane;
  std::vector<Trajectory> trajectories;  // one per calendar year
};

/// Calibrates K per year, fits the precipitation-binned plane and replays
/// every year from the configured initial state.
inline HistoryFit fit_history(const WeatherSeries& weather, const CaseSeries& cases, const Config& cfg) {
  HistoryFit fit;
  const CompartmentState init = cfg.init.to_state();
  fit.k = calibrate_K(weather, cases, cfg.model, cfg.k_grid, init);
  fit.plane = fit_plane(plane_samples(weather, fit.k), quantile_edges(weather.precips(), cfg.precip_bins));
  for (int y : weather.years()) {
    const WeatherSeries w = weather.year(y);
    fit.trajectories.push_back(simulate(cfg.model, w, fit.k.year(y).k, init));
  }
  return fit;
}

inline OnsetPdf fit_onset(const HistoryFit& fit, const CaseSeries& cases, const Config& cfg,
                          std::vector<int>* skipped_years = nullptr) {
  OnsetCollection c = collect_onset_samples(fit.trajectories, cases, cfg.transform);
  if (skipped_years) *skipped_years = c.years_without_cases;
  return fit_onset_pdf(std::move(c.samples), cfg.onset_bandwidth, cfg.contour_levels, cfg.onset_grid, cfg.transform);
}

inline RateSurface fit_severity(const HistoryFit& fit, const WeatherSeries& weather, const CaseSeries& cases,
                                const Config& cfg) {
  return fit_rate_surface(collect_severity_samples(fit.trajectories, weather, cases, cfg.w_coeffs),
                          cfg.severity_bandwidth, std::nullopt, cfg.severity_grid);
}

/// A forecast stretch: the weather driving it and the resulting trajectory.
struct ForecastRun {
  WeatherSeries weather;
  Trajectory traj;
  std::size_t windows = 0;
};

inline Trajectory simulate_plane(const Config& cfg, const PlaneModel& plane, const WeatherSeries& w,
                                 const CompartmentState& init) {
  return simulate(cfg.model, w, simulation_capacity(predict_K_plane(plane, w)), init);
}

/// Long-term: AR(ar_order_long) weather for `lead` days after the history,
/// plane K, simulated from the configured initial state.
inline ForecastRun forecast_long(const WeatherSeries& history, const PlaneModel& plane, const Config& cfg, int lead) {
  ForecastRun run;
  run.weather = forecast_weather(history, ForecastMode::long_term, lead, {cfg.ar_order_long});
  run.traj = simulate_plane(cfg, plane, run.weather, cfg.init.to_state());
  run.windows = 1;
  return run;
}

/// Short-term: walk the target period in windows of `lead` days. Each window
/// starts from the state reached on actual weather, forecasts the window with
/// AR(lead) fitted on everything observed so far, and the last window is cut at
/// the end of `actual`. `actual` must start the day after `history` ends.
inline ForecastRun forecast_short(const WeatherSeries& history, const WeatherSeries& actual, const PlaneModel& plane,
                                  const Config& cfg, int lead) {
  ForecastRun run;
  if (lead <= 0 || actual.empty()) return run;
  const CompartmentState init = cfg.init.to_state();
  std::vector<WeatherRecord> fc_records;
  CompartmentState state = init;
  for (std::size_t start = 0; start < actual.size(); start += static_cast<std::size_t>(lead)) {
    const std::size_t len = std::min(static_cast<std::size_t>(lead), actual.size() - start);
    const WeatherSeries observed = actual.slice(actual.first_date(), actual[start].date);
    if (!observed.empty()) {
      const Trajectory to_start = simulate_plane(cfg, plane, observed, init);
      state = to_start.states.back();
    }
    const WeatherSeries known = observed.empty() ? history : concat(history, observed);
    const WeatherSeries fc = forecast_weather(known, ForecastMode::short_term, lead);
    const WeatherSeries window = fc.slice(fc.first_date(), add_days(fc.first_date(), static_cast<long>(len)));
    const Trajectory part = simulate_plane(cfg, plane, window, state);
    fc_records.insert(fc_records.end(), window.begin(), window.end());
    auto& t = run.traj;
    t.dates.insert(t.dates.end(), part.dates.begin(), part.dates.end());
    t.states.insert(t.states.end(), part.states.begin(), part.states.end());
    t.mosquitoes.insert(t.mosquitoes.end(), part.mosquitoes.begin(), part.mosquitoes.end());
    t.r0.insert(t.r0.end(), part.r0.begin(), part.r0.end());
    t.new_cases.insert(t.new_cases.end(), part.new_cases.begin(), part.new_cases.end());
    t.temps.insert(t.temps.end(), part.temps.begin(), part.temps.end());
    t.clamp_count += part.clamp_count;
    ++run.windows;
  }
  run.weather = WeatherSeries(std::move(fc_records));
  return run;
}

/// MPP severity over a forecast run. The prior is built from the run's (M, W)
/// curve; days before `severity_start_day` and, with the gate on, days the
/// onset PDF marks green report zero.
inline std::vector<SeverityDay> severity_for_run(const ForecastRun& run, const RateSurface& rate, const Config& cfg,
                                                 const OnsetPdf* gate_pdf = nullptr) {
  std::vector<CurvePoint> curve;
  for (std::size_t i = 0; i < run.traj.size(); ++i)
    curve.push_back({run.traj.mosquitoes[i], weather_feature(cfg.w_coeffs, run.weather[i])});
  const Grid2D prior = build_prior(cfg.prior, curve, rate.lambda, cfg.prior_sigma, cfg.band_halfwidth);
  const auto posts = build_posteriors(prior, rate, cfg.x_max);

  std::vector<bool> gate(run.traj.size(), true);
  for (std::size_t i = 0; i < gate.size(); ++i) {
    if (static_cast<int>(i) < cfg.severity_start_day) gate[i] = false;
    if (cfg.severity_gate && gate_pdf &&
        classify(*gate_pdf, run.traj.mosquitoes[i], run.traj.r0[i]) == RiskLevel::green)
      gate[i] = false;
  }
  return estimate_severity(run.traj, run.weather, posts, cfg.w_coeffs, &gate);
}

}  // namespace spillcast
