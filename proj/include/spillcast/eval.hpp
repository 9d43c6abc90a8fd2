#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "spillcast/date.hpp"
#include "spillcast/error.hpp"
#include "spillcast/io.hpp"
#include "spillcast/series.hpp"

namespace spillcast {

/// Probabilities over counts 0..probs.size()-1.
struct PredictiveDist {
  Date week{};
  std::vector<double> probs;
};

inline constexpr double kNormTolerance = 1e-9;

inline void require_normalized(const PredictiveDist& d) {
  double s = 0.0;
  for (double p : d.probs) {
    if (!(p >= 0.0)) throw Error(Errc::UnnormalizedDist, "negative probability");
    s += p;
  }
  if (std::abs(s - 1.0) > kNormTolerance) throw Error(Errc::UnnormalizedDist, "mass " + io::fmt(s));
}

inline double log_score(const PredictiveDist& dist, long observed, double floor = -10.0) {
  require_normalized(dist);
  if (observed < 0 || observed >= static_cast<long>(dist.probs.size())) return floor;
  const double p = dist.probs[static_cast<std::size_t>(observed)];
  return p > 0.0 ? std::max(std::log(p), floor) : floor;
}

inline PredictiveDist normalized(std::vector<double> probs, Date week = {}) {
  double s = 0.0;
  for (double p : probs) s += p;
  for (double& p : probs) p /= s;
  return {week, std::move(probs)};
}

/// Discretized Gaussian around the MPP point prediction on 0..x_cap.
inline PredictiveDist bayesian_predictive(double predicted, double sigma = 1.5, int x_cap = 100, Date week = {}) {
  if (!(predicted >= 0.0)) throw Error(Errc::InvariantViolation, "negative prediction");
  std::vector<double> probs(static_cast<std::size_t>(x_cap) + 1, 0.0);
  if (sigma <= 0.0) {
    const auto k = std::min<long>(std::lround(predicted), x_cap);
    probs[static_cast<std::size_t>(k)] = 1.0;
    return {week, std::move(probs)};
  }
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double z = (static_cast<double>(k) - predicted) / sigma;
    probs[k] = std::exp(-0.5 * z * z);
  }
  if (std::all_of(probs.begin(), probs.end(), [](double p) { return p == 0.0; })) probs.back() = 1.0;
  return normalized(std::move(probs), week);
}

/// pmf(k) = C(k+r-1, k) p^r (1-p)^k, mean r(1-p)/p. `poisson` replaces it
/// with Poisson(mean) when the data are not overdispersed.
struct NegBinModel {
  double r = 1.0;
  double p = 0.5;
  bool poisson = false;
  double mean = 0.0;
};

inline double negbin_logpmf(long k, double r, double p) {
  return std::lgamma(static_cast<double>(k) + r) - std::lgamma(r) - std::lgamma(static_cast<double>(k) + 1.0) +
         r * std::log(p) + static_cast<double>(k) * std::log1p(-p);
}

inline double negbin_loglik(const std::vector<double>& xs, double r, double p) {
  double s = 0.0;
  for (double x : xs) s += negbin_logpmf(static_cast<long>(x), r, p);
  return s;
}

inline NegBinModel fit_negbin(const std::vector<double>& counts, std::size_t min_obs = 8) {
  if (counts.size() < min_obs) throw Error(Errc::TooFewObservations, std::to_string(counts.size()) + " weeks");
  const double n = static_cast<double>(counts.size());
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= n;
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= n - 1.0;

  NegBinModel m;
  m.mean = mean;
  if (var <= mean) {
    m.poisson = true;
    return m;
  }
  // profile likelihood in log r; p is the closed-form MLE given r
  auto neg_profile = [&](double log_r) {
    const double r = std::exp(log_r);
    return -negbin_loglik(counts, r, r / (r + mean));
  };
  constexpr double lo = -9.0, hi = 12.0;
  constexpr int scan = 64;
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= scan; ++i) {
    const double v = neg_profile(lo + (hi - lo) * i / scan);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  const double step = (hi - lo) / scan;
  const double a = lo + std::max(best - 1, 0) * step, b = lo + std::min(best + 1, scan) * step;
  const auto [log_r, value] = boost::math::tools::brent_find_minima(neg_profile, a, b, 52);
  (void)value;
  m.r = std::exp(log_r);
  m.p = m.r / (m.r + mean);
  return m;
}

inline double model_pmf(const NegBinModel& m, long k) {
  if (m.poisson) {
    if (m.mean == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(-m.mean + static_cast<double>(k) * std::log(m.mean) - std::lgamma(static_cast<double>(k) + 1.0));
  }
  return std::exp(negbin_logpmf(k, m.r, m.p));
}

/// Fits on the window and returns the pmf truncated to 0..x_cap.
inline PredictiveDist nb_one_step(const std::vector<double>& window, int x_cap = 100, std::size_t min_obs = 8,
                                  Date week = {}) {
  const NegBinModel m = fit_negbin(window, min_obs);
  std::vector<double> probs(static_cast<std::size_t>(x_cap) + 1);
  for (std::size_t k = 0; k < probs.size(); ++k) probs[k] = model_pmf(m, static_cast<long>(k));
  return normalized(std::move(probs), week);
}

struct WeekScore {
  Date week{};
  long observed = 0;
  double prob_observed = 0.0;
  double score = 0.0;
};

struct ScoreReport {
  std::string model;
  std::vector<WeekScore> weeks;
  double ts = 0.0, zs = 0.0, nzs = 0.0;
};

inline ScoreReport score_run(const std::vector<PredictiveDist>& predictions, const CaseSeries& observations,
                             double floor = -10.0, std::string model = {}) {
  if (predictions.size() != observations.size())
    throw Error(Errc::WeekMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                        std::to_string(observations.size()) + " weeks");
  ScoreReport rep;
  rep.model = std::move(model);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& d = predictions[i];
    const auto& o = observations[i];
    if (d.week != Date{} && d.week != o.week_start) throw Error(Errc::WeekMismatch, format_date(o.week_start));
    const double s = log_score(d, o.count, floor);
    const double p = o.count < static_cast<long>(d.probs.size()) ? d.probs[static_cast<std::size_t>(o.count)] : 0.0;
    rep.weeks.push_back({o.week_start, o.count, p, s});
    (o.count == 0 ? rep.zs : rep.nzs) += s;
  }
  rep.ts = rep.zs + rep.nzs;
  return rep;
}

inline std::string format_scores(const std::vector<ScoreReport>& reports) {
  std::ostringstream out;
  out << "week,observed,model,prob_observed,score\n";
  if (reports.empty()) return out.str();
  for (std::size_t i = 0; i < reports.front().weeks.size(); ++i)
    for (const auto& r : reports) {
      const auto& w = r.weeks[i];
      out << format_date(w.week) << ',' << w.observed << ',' << r.model << ',' << io::fmt(w.prob_observed) << ','
          << io::fmt(w.score) << '\n';
    }
  return out.str();
}

}  // namespace spillcast
