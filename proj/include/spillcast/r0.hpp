#pragma once

#include <cmath>

#include "spillcast/error.hpp"

namespace spillcast {

/// Rates (1/day) and susceptible counts entering the basic reproduction number.
struct R0Inputs {
  double beta_bird_to_mosquito = 0.0;
  double bird_incubation = 0.0;      // delta_B
  double bird_mortality = 0.0;       // mu_B
  double bird_recovery = 0.0;        // lambda_B
  double bird_wnd_mortality = 0.0;   // mu_WND-B
  double beta_mosquito_to_bird = 0.0;
  double pdr = 0.0;                  // pathogen development rate
  double mosquito_mortality = 0.0;   // mu_M
  double susceptible_mosquitoes = 0.0;
  double susceptible_birds = 0.0;
};

namespace detail {
inline void require_nonnegative(const R0Inputs& in) {
  const double all[] = {in.beta_bird_to_mosquito, in.bird_incubation,    in.bird_mortality,
                        in.bird_recovery,         in.bird_wnd_mortality, in.beta_mosquito_to_bird,
                        in.pdr,                   in.mosquito_mortality, in.susceptible_mosquitoes,
                        in.susceptible_birds};
  for (double v : all)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw Error(Errc::InvariantViolation, "R0 inputs must be finite and nonnegative");
}
}  // namespace detail

/// Probability that a progression clock beats a competing death clock when both
/// are exponential: P(T_progress < T_death) = progress / (progress + death).
inline double exposed_survival(double progress_rate, double death_rate) {
  const double total = progress_rate + death_rate;
  if (!(total > 0.0)) throw Error(Errc::ZeroDenominator, "progress_rate + death_rate must be > 0");
  return progress_rate / total;
}

/// Bird-side factor: infections produced in mosquitoes by one infectious bird.
inline double r0_bird(const R0Inputs& in) {
  detail::require_nonnegative(in);
  const double exposed_exit = in.bird_incubation + in.bird_mortality;
  const double infectious_exit = in.bird_recovery + in.bird_wnd_mortality + in.bird_mortality;
  if (!(exposed_exit > 0.0) || !(infectious_exit > 0.0))
    throw Error(Errc::ZeroDenominator, "bird exit rates must be positive");
  return in.beta_bird_to_mosquito * in.susceptible_mosquitoes * in.bird_incubation /
         (exposed_exit * infectious_exit);
}

/// Mosquito-side factor: infections produced in birds by one infectious mosquito.
inline double r0_mosquito(const R0Inputs& in) {
  detail::require_nonnegative(in);
  if (!(in.mosquito_mortality > 0.0))
    throw Error(Errc::ZeroDenominator, "mosquito mortality must be positive");
  return in.beta_mosquito_to_bird * in.susceptible_birds * in.pdr /
         (in.mosquito_mortality * (in.pdr + in.mosquito_mortality));
}

/// Geometric mean of the two host-vector factors (next-generation matrix).
inline double r0(const R0Inputs& in) {
  const double bird = r0_bird(in);
  const double mosquito = r0_mosquito(in);
  if (bird == 0.0 || mosquito == 0.0) return 0.0;
  return std::sqrt(bird * mosquito);
}

}  // namespace spillcast
