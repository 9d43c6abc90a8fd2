#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spillcast/date.hpp"
#include "spillcast/error.hpp"
#include "spillcast/series.hpp"

namespace spillcast {

/// y_t = intercept + sum_i coeffs[i-1] * y_{t-i} + e_t
struct ARModel {
  int order = 1;
  std::vector<double> coeffs;
  double intercept = 0.0;
  double residual_variance = 0.0;
};

inline constexpr double kArRidge = 1e-8;

/// Least-squares AR fit. The intercept is estimated by centering and is not
/// penalized; the ridge term only touches the lag coefficients.
inline ARModel fit_ar(std::span<const double> series, int order, double ridge = kArRidge) {
  if (order < 1) throw Error(Errc::InvariantViolation, "AR order must be >= 1");
  const auto p = static_cast<std::size_t>(order);
  const std::size_t n = series.size();
  // n >= 2p keeps at least p equations; the ridge resolves the one-off deficit
  if (n < 2 * p || n <= p) throw Error(Errc::TooShort, "series length " + std::to_string(n) + " < 2*order");
  for (double v : series)
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "AR series");

  const std::size_t rows = n - p;
  Eigen::MatrixXd X(rows, p);
  Eigen::VectorXd y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + p;
    y(r) = series[t];
    for (std::size_t i = 0; i < p; ++i) X(r, i) = series[t - 1 - i];
  }
  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::MatrixXd gram = Xc.transpose() * Xc;
  gram.diagonal().array() += ridge;
  const Eigen::VectorXd rhs = Xc.transpose() * yc;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw Error(Errc::SingularDesign, "AR normal equations");
  const Eigen::VectorXd phi = ldlt.solve(rhs);
  if (!phi.allFinite()) throw Error(Errc::SingularDesign, "AR normal equations");

  ARModel model;
  model.order = order;
  model.coeffs.assign(phi.data(), phi.data() + p);
  model.intercept = y_mean - x_mean.dot(phi);
  const Eigen::VectorXd resid = yc - Xc * phi;
  model.residual_variance = resid.squaredNorm() / static_cast<double>(rows);
  return model;
}

/// Iterated one-step prediction; predictions are fed back as inputs.
inline std::vector<double> forecast(const ARModel& model, std::span<const double> history, int horizon) {
  if (horizon <= 0) return {};
  const auto p = static_cast<std::size_t>(model.order);
  if (history.size() < p) throw Error(Errc::HistoryTooShort, "history shorter than AR order");
  std::vector<double> buf(history.end() - static_cast<long>(p), history.end());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    double next = model.intercept;
    const std::size_t last = buf.size() - 1;
    for (std::size_t i = 0; i < p; ++i) next += model.coeffs[i] * buf[last - i];
    out.push_back(next);
    buf.push_back(next);
  }
  return out;
}

enum class ForecastMode { long_term, short_term };

struct WeatherForecastOptions {
  int long_order = 365;
};

/// Forecasts `lead` days past the end of `history`. Long mode fits AR(long_order)
/// for the seasonal trend; short mode fits AR(lead). Each variable is modelled
/// independently. Humidity is clamped to [0, 100] and precipitation to >= 0.
inline WeatherSeries forecast_weather(const WeatherSeries& history, ForecastMode mode, int lead,
                                      WeatherForecastOptions opts = {}) {
  if (lead <= 0) return WeatherSeries{};
  const int order = mode == ForecastMode::long_term ? opts.long_order : lead;
  if (mode == ForecastMode::long_term && history.size() < 2 * static_cast<std::size_t>(opts.long_order))
    throw Error(Errc::HistoryTooShort, "long-term forecast needs at least two seasons of history");
  if (mode == ForecastMode::short_term && history.size() < 2 * static_cast<std::size_t>(lead))
    throw Error(Errc::HistoryTooShort, "short-term forecast needs at least 2*lead days of history");

  auto run = [&](const std::vector<double>& column) {
    return forecast(fit_ar(column, order), column, lead);
  };
  const std::vector<double> t = run(history.temps());
  const std::vector<double> h = run(history.humidities());
  const std::vector<double> p = run(history.precips());

  std::vector<WeatherRecord> out;
  out.reserve(static_cast<std::size_t>(lead));
  for (int i = 0; i < lead; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out.push_back({add_days(history.last_date(), i + 1), t[k], std::clamp(h[k], 0.0, 100.0), std::max(p[k], 0.0), false});
  }
  return WeatherSeries(std::move(out));
}

}  // namespace spillcast
