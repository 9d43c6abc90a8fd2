#pragma once

// Synthetic weather and case generators for fixtures and tests.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "spillcast/spillcast.hpp"

namespace spillcast::synth {

struct Climate {
  double temp_mean = 18.0;
  double temp_amplitude = 6.0;
  double warming_per_year = 0.0;  // degC added per year after the first
  double humidity_mean = 60.0;
  double humidity_amplitude = 15.0;
  double precip_mean = 2.0;
  double noise_sd = 0.0;  // AR(1) temperature anomaly innovation
  double noise_phi = 0.7;
};

/// Daily weather for whole calendar years [first_year, first_year + years).
inline WeatherSeries weather(const Climate& c, int first_year, int years, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<WeatherRecord> out;
  double anomaly = 0.0;
  for (int y = first_year; y < first_year + years; ++y) {
    const double shift = c.warming_per_year * (y - first_year);
    for (Date d = year_start(y); d < year_start(y + 1); d = add_days(d, 1)) {
      const double phase = 2.0 * std::numbers::pi * (day_of_year(d) - 110.0) / 365.25;
      anomaly = c.noise_phi * anomaly + c.noise_sd * z(rng);
      const double t = c.temp_mean + shift + c.temp_amplitude * std::sin(phase) + anomaly;
      const double h = std::clamp(c.humidity_mean - c.humidity_amplitude * std::sin(phase) + 2.0 * c.noise_sd * z(rng),
                                  0.0, 100.0);
      const double p = std::max(0.0, c.precip_mean * (1.0 - 0.6 * std::sin(phase)) + c.noise_sd * z(rng));
      out.push_back({d, t, h, p, false});
    }
  }
  return WeatherSeries(std::move(out));
}

/// Weekly Poisson counts drawn around the model's expected reported cases.
/// Weeks start on each year's first Monday and cover the whole series.
inline CaseSeries cases(const Trajectory& traj, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::vector<CaseRecord> out;
  Date start = traj.dates.front();
  while (std::chrono::weekday{start} != std::chrono::Monday) start = add_days(start, 1);
  for (Date w = start; add_days(w, 6) <= traj.dates.back(); w = add_days(w, 7)) {
    const double mean = weekly_expected_cases(traj, w);
    std::poisson_distribution<long> pois(std::max(mean, 1e-12));
    out.push_back({w, pois(rng), false});
  }
  return CaseSeries(std::move(out));
}

/// Runs each calendar year from `init` with that year's constant K.
inline Trajectory run_years(const ModelParams& p, const WeatherSeries& w, const std::vector<double>& k_per_year,
                            const CompartmentState& init) {
  Trajectory all;
  const auto years = w.years();
  for (std::size_t i = 0; i < years.size(); ++i) {
    const WeatherSeries wy = w.year(years[i]);
    const Trajectory t = simulate(p, wy, std::vector<double>(wy.size(), k_per_year[i % k_per_year.size()]), init);
    all.dates.insert(all.dates.end(), t.dates.begin(), t.dates.end());
    all.states.insert(all.states.end(), t.states.begin(), t.states.end());
    all.mosquitoes.insert(all.mosquitoes.end(), t.mosquitoes.begin(), t.mosquitoes.end());
    all.r0.insert(all.r0.end(), t.r0.begin(), t.r0.end());
    all.new_cases.insert(all.new_cases.end(), t.new_cases.begin(), t.new_cases.end());
    all.temps.insert(all.temps.end(), t.temps.begin(), t.temps.end());
  }
  return all;
}

}  // namespace spillcast::synth
