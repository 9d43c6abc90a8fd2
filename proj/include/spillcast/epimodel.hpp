#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spillcast/date.hpp"
#include "spillcast/error.hpp"
#include "spillcast/r0.hpp"
#include "spillcast/series.hpp"

namespace spillcast {

// ---------------------------------------------------------------------------
// Thermal response curves
// ---------------------------------------------------------------------------

struct ThermalCurve {
  enum class Kind { briere, quadratic, constant };

  Kind kind = Kind::constant;
  double c = 0.0;      // scale (or the value itself for `constant`)
  double t_min = 0.0;  // lower thermal limit, degC
  double t_max = 0.0;  // upper thermal limit, degC

  static ThermalCurve briere(double c, double t_min, double t_max) {
    return {Kind::briere, c, t_min, t_max};
  }
  static ThermalCurve quadratic(double c, double t_min, double t_max) {
    return {Kind::quadratic, c, t_min, t_max};
  }
  static ThermalCurve constant(double value) { return {Kind::constant, value, 0.0, 0.0}; }
};

/// Rate at temperature `temp`; never negative.
inline double eval_thermal(const ThermalCurve& curve, double temp) {
  double v = 0.0;
  switch (curve.kind) {
    case ThermalCurve::Kind::briere:
      if (temp >= curve.t_min && temp <= curve.t_max)
        v = curve.c * temp * (temp - curve.t_min) * std::sqrt(std::max(curve.t_max - temp, 0.0));
      break;
    case ThermalCurve::Kind::quadratic:
      v = -curve.c * (temp - curve.t_min) * (temp - curve.t_max);
      break;
    case ThermalCurve::Kind::constant:
      v = curve.c;
      break;
  }
  return std::max(v, 0.0);
}

/// Mortality derived from a lifespan curve: 1/lifespan, capped at `max_rate`
/// (which is also used where the lifespan curve is zero).
struct LifespanMortality {
  ThermalCurve lifespan;
  double max_rate = 1.0;
};

inline double eval_mortality(const LifespanMortality& m, double temp) {
  const double life = eval_thermal(m.lifespan, temp);
  if (life <= 0.0) return m.max_rate;
  return std::min(1.0 / life, m.max_rate);
}

// ---------------------------------------------------------------------------
// Parameters and state
// ---------------------------------------------------------------------------

struct ModelParams {
  // mosquito, temperature driven
  ThermalCurve egg_laying = ThermalCurve::briere(2.8e-3, 5.0, 38.0);          // eggs/female/day
  ThermalCurve egg_hatch = ThermalCurve::briere(1.0e-3, 5.0, 38.0);           // 1/day
  ThermalCurve aquatic_development = ThermalCurve::briere(3.76e-5, 0.1, 38.5);
  LifespanMortality aquatic_mortality{ThermalCurve::quadratic(0.15, 5.0, 38.0), 1.0};
  LifespanMortality adult_mortality{ThermalCurve::quadratic(0.05, 0.0, 37.0), 1.0};
  ThermalCurve pdr = ThermalCurve::briere(7.38e-5, 11.4, 45.2);
  ThermalCurve beta_bird_to_mosquito = ThermalCurve::briere(3.0e-4, 9.4, 39.6);
  ThermalCurve beta_mosquito_to_bird = ThermalCurve::briere(3.0e-4, 9.4, 39.6);
  ThermalCurve beta_mosquito_to_human = ThermalCurve::briere(1.0e-6, 9.4, 39.6);
  double egg_mortality = 0.05;

  // birds
  double bird_laying = 0.01;       // eggs per adult bird per day
  double bird_hatch = 1.0 / 14.0;  // egg -> fledgling
  double bird_maturation = 1.0 / 30.0;
  double bird_mortality = 1.0 / 730.0;  // mu_B
  double bird_capacity = 100.0;         // logistic cap on fledglings
  double bird_incubation = 1.0 / 3.0;   // delta_B
  double bird_recovery = 0.25;          // lambda_B
  double bird_wnd_mortality = 0.2;      // mu_WND-B

  // humans
  double human_incubation = 1.0 / 6.0;
  double human_recovery = 1.0 / 14.0;
  double reporting_fraction = 1.0;  // rho

  int steps_per_day = 24;
};

enum class Comp : std::size_t { HS, HE, HI, HR, EM, AM, MS, ME, MI, EB, FB, BS, BE, BI, BR };
inline constexpr std::size_t kCompartments = 15;

inline constexpr const char* kCompartmentNames[kCompartments] = {
    "H_S", "H_E", "H_I", "H_R", "E_M", "A_M", "M_S", "M_E", "M_I",
    "E_B", "F_B", "B_S", "B_E", "B_I", "B_R"};

struct CompartmentState {
  std::array<double, kCompartments> v{};

  double& operator[](Comp c) { return v[static_cast<std::size_t>(c)]; }
  double operator[](Comp c) const { return v[static_cast<std::size_t>(c)]; }

  double humans() const { return (*this)[Comp::HS] + (*this)[Comp::HE] + (*this)[Comp::HI] + (*this)[Comp::HR]; }
  double adult_mosquitoes() const { return (*this)[Comp::MS] + (*this)[Comp::ME] + (*this)[Comp::MI]; }
  double adult_birds() const { return (*this)[Comp::BS] + (*this)[Comp::BE] + (*this)[Comp::BI] + (*this)[Comp::BR]; }

  bool operator==(const CompartmentState&) const = default;
};

/// Rates that depend only on temperature, evaluated once per day.
struct DailyRates {
  double egg_laying, egg_hatch, aquatic_development, aquatic_mortality, adult_mortality, pdr;
  double beta_bm, beta_mb, beta_mh;
};

inline DailyRates daily_rates(const ModelParams& p, double temp) {
  return {eval_thermal(p.egg_laying, temp),
          eval_thermal(p.egg_hatch, temp),
          eval_thermal(p.aquatic_development, temp),
          eval_mortality(p.aquatic_mortality, temp),
          eval_mortality(p.adult_mortality, temp),
          eval_thermal(p.pdr, temp),
          eval_thermal(p.beta_bird_to_mosquito, temp),
          eval_thermal(p.beta_mosquito_to_bird, temp),
          eval_thermal(p.beta_mosquito_to_human, temp)};
}

/// Assembles the R0 inputs for one day from that day's rates and state.
inline R0Inputs r0_inputs(const ModelParams& p, double temp, const CompartmentState& s) {
  const DailyRates r = daily_rates(p, temp);
  R0Inputs in;
  in.beta_bird_to_mosquito = r.beta_bm;
  in.bird_incubation = p.bird_incubation;
  in.bird_mortality = p.bird_mortality;
  in.bird_recovery = p.bird_recovery;
  in.bird_wnd_mortality = p.bird_wnd_mortality;
  in.beta_mosquito_to_bird = r.beta_mb;
  in.pdr = r.pdr;
  in.mosquito_mortality = r.adult_mortality;
  in.susceptible_mosquitoes = s[Comp::MS];
  in.susceptible_birds = s[Comp::BS];
  return in;
}

namespace detail {

/// Right-hand side plus the human infection flux (S -> E per day).
inline CompartmentState rhs(const CompartmentState& s, const ModelParams& p, const DailyRates& r,
                            double capacity, double& human_infection_flux) {
  CompartmentState d;
  const double birds = s.adult_birds();
  const double humans = s.humans();
  const double adults = s.adult_mosquitoes();

  // mosquito life cycle
  const double aquatic_room = std::max(1.0 - s[Comp::AM] / capacity, 0.0);
  const double recruitment = r.egg_hatch * s[Comp::EM] * aquatic_room;
  d[Comp::EM] = r.egg_laying * adults - (r.egg_hatch + p.egg_mortality) * s[Comp::EM];
  d[Comp::AM] = recruitment - (r.aquatic_development + r.aquatic_mortality) * s[Comp::AM];
  const double emergence = r.aquatic_development * s[Comp::AM];

  // frequency-dependent contact through the adult bird population
  const double mosquito_infection = birds > 0.0 ? r.beta_bm * s[Comp::BI] / birds * s[Comp::MS] : 0.0;
  const double bird_infection = birds > 0.0 ? r.beta_mb * s[Comp::MI] / birds * s[Comp::BS] : 0.0;
  const double human_infection = humans > 0.0 ? r.beta_mh * s[Comp::MI] / humans * s[Comp::HS] : 0.0;

  d[Comp::MS] = emergence - mosquito_infection - r.adult_mortality * s[Comp::MS];
  d[Comp::ME] = mosquito_infection - (r.pdr + r.adult_mortality) * s[Comp::ME];
  d[Comp::MI] = r.pdr * s[Comp::ME] - r.adult_mortality * s[Comp::MI];

  // bird life cycle
  const double fledgling_room = std::max(1.0 - s[Comp::FB] / p.bird_capacity, 0.0);
  d[Comp::EB] = p.bird_laying * birds - (p.bird_hatch + p.bird_mortality) * s[Comp::EB];
  d[Comp::FB] = p.bird_hatch * s[Comp::EB] * fledgling_room - (p.bird_maturation + p.bird_mortality) * s[Comp::FB];
  d[Comp::BS] = p.bird_maturation * s[Comp::FB] - bird_infection - p.bird_mortality * s[Comp::BS];
  d[Comp::BE] = bird_infection - (p.bird_incubation + p.bird_mortality) * s[Comp::BE];
  d[Comp::BI] = p.bird_incubation * s[Comp::BE] -
                (p.bird_recovery + p.bird_wnd_mortality + p.bird_mortality) * s[Comp::BI];
  d[Comp::BR] = p.bird_recovery * s[Comp::BI] - p.bird_mortality * s[Comp::BR];

  // humans: dead-end host, closed population
  d[Comp::HS] = -human_infection;
  d[Comp::HE] = human_infection - p.human_incubation * s[Comp::HE];
  d[Comp::HI] = p.human_incubation * s[Comp::HE] - p.human_recovery * s[Comp::HI];
  d[Comp::HR] = p.human_recovery * s[Comp::HI];

  human_infection_flux = human_infection;
  return d;
}

inline void check_finite(const CompartmentState& s, const char* what) {
  for (double x : s.v)
    if (!std::isfinite(x)) throw Error(Errc::NonFiniteInput, what);
}

}  // namespace detail

/// d(state)/dt at temperature `temp` and aquatic carrying capacity `capacity`.
inline CompartmentState derivatives(const CompartmentState& state, const ModelParams& params, double temp,
                                    double capacity) {
  detail::check_finite(state, "non-finite state");
  if (!std::isfinite(temp) || !std::isfinite(capacity)) throw Error(Errc::NonFiniteInput, "temperature/capacity");
  if (!(capacity > 0.0)) throw Error(Errc::InvariantViolation, "carrying capacity must be > 0");
  double flux = 0.0;
  return detail::rhs(state, params, daily_rates(params, temp), capacity, flux);
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct Trajectory {
  std::vector<Date> dates;
  std::vector<CompartmentState> states;  // end-of-day state
  std::vector<double> mosquitoes;        // M = M_S + M_E + M_I
  std::vector<double> r0;
  std::vector<double> new_cases;         // expected reported new human infections that day
  std::vector<double> temps;
  std::size_t clamp_count = 0;           // negative excursions set to zero

  std::size_t size() const { return dates.size(); }
  bool empty() const { return dates.empty(); }

  long index_of(Date date) const {
    if (dates.empty()) return -1;
    const long i = days_between(dates.front(), date);
    return (i >= 0 && i < static_cast<long>(dates.size())) ? i : -1;
  }
};

inline constexpr double kBlowUpLimit = 1e12;

/// Fixed-step RK4 over the daily forcing. Temperature and capacity are held
/// constant within each day; state is sampled at the end of each day.
inline Trajectory simulate(const ModelParams& params, const WeatherSeries& weather, std::span<const double> capacity,
                           const CompartmentState& init) {
  if (capacity.size() != weather.size())
    throw Error(Errc::LengthMismatch, "capacity series length " + std::to_string(capacity.size()) +
                                          " != weather length " + std::to_string(weather.size()));
  if (params.steps_per_day < 1) throw Error(Errc::InvariantViolation, "steps_per_day must be >= 1");
  detail::check_finite(init, "non-finite initial state");
  for (double x : init.v)
    if (x < 0.0) throw Error(Errc::InvariantViolation, "initial state has a negative compartment");

  Trajectory out;
  const std::size_t n = weather.size();
  out.dates.reserve(n);
  out.states.reserve(n);
  out.mosquitoes.reserve(n);
  out.r0.reserve(n);
  out.new_cases.reserve(n);
  out.temps.reserve(n);

  const double h = 1.0 / params.steps_per_day;
  CompartmentState s = init;

  for (std::size_t day = 0; day < n; ++day) {
    const double temp = weather[day].temp_mean;
    const double cap = capacity[day];
    if (!std::isfinite(temp) || !std::isfinite(cap)) throw Error(Errc::NonFiniteInput, "weather/capacity");
    if (!(cap > 0.0)) throw Error(Errc::InvariantViolation, "carrying capacity must be > 0");
    const DailyRates rates = daily_rates(params, temp);

    double infections = 0.0;
    for (int step = 0; step < params.steps_per_day; ++step) {
      double f1, f2, f3, f4;
      const CompartmentState k1 = detail::rhs(s, params, rates, cap, f1);
      CompartmentState tmp;
      for (std::size_t i = 0; i < kCompartments; ++i) tmp.v[i] = s.v[i] + 0.5 * h * k1.v[i];
      const CompartmentState k2 = detail::rhs(tmp, params, rates, cap, f2);
      for (std::size_t i = 0; i < kCompartments; ++i) tmp.v[i] = s.v[i] + 0.5 * h * k2.v[i];
      const CompartmentState k3 = detail::rhs(tmp, params, rates, cap, f3);
      for (std::size_t i = 0; i < kCompartments; ++i) tmp.v[i] = s.v[i] + h * k3.v[i];
      const CompartmentState k4 = detail::rhs(tmp, params, rates, cap, f4);
      for (std::size_t i = 0; i < kCompartments; ++i) {
        s.v[i] += h / 6.0 * (k1.v[i] + 2.0 * k2.v[i] + 2.0 * k3.v[i] + k4.v[i]);
        if (s.v[i] < 0.0) {
          s.v[i] = 0.0;
          ++out.clamp_count;
        }
        if (!std::isfinite(s.v[i])) throw Error(Errc::NonFiniteInput, "state became non-finite");
        if (s.v[i] > kBlowUpLimit)
          throw Error(Errc::BlowUp, std::string(kCompartmentNames[i]) + " exceeded 1e12 on " +
                                        format_date(weather[day].date));
      }
      infections += h / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    }

    out.dates.push_back(weather[day].date);
    out.states.push_back(s);
    out.mosquitoes.push_back(s.adult_mosquitoes());
    out.r0.push_back(r0(r0_inputs(params, temp, s)));
    out.new_cases.push_back(params.reporting_fraction * std::max(infections, 0.0));
    out.temps.push_back(temp);
  }
  return out;
}

/// Expected reported cases in the week starting at `week_start` (days outside
/// the trajectory contribute nothing).
inline double weekly_expected_cases(const Trajectory& traj, Date week_start) {
  double total = 0.0;
  for (int d = 0; d < 7; ++d) {
    const long i = traj.index_of(add_days(week_start, d));
    if (i >= 0) total += traj.new_cases[static_cast<std::size_t>(i)];
  }
  return total;
}

}  // namespace spillcast
