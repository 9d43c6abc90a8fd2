#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spillcast/config.hpp"
#include "spillcast/date.hpp"
#include "spillcast/epimodel.hpp"
#include "spillcast/error.hpp"
#include "spillcast/grid.hpp"
#include "spillcast/io.hpp"
#include "spillcast/series.hpp"

namespace spillcast {

struct SeveritySample {
  double m = 0.0;
  double w = 0.0;
  double x = 1.0;
};

/// Nadaraya-Watson rate over the (m, w) grid.
struct RateSurface {
  Grid2D lambda;
  Bandwidth bandwidth;
  std::vector<SeveritySample> samples;
};

inline constexpr double kMinKernelWeight = 1e-12;

/// Scalar weather feature W = a*T + b*H + c*P.
inline double weather_feature(const std::array<double, 3>& coeffs, const WeatherRecord& r) {
  return coeffs[0] * r.temp_mean + coeffs[1] * r.humidity + coeffs[2] * r.precip;
}

/// Every nonzero case week, sampled at the week midpoint.
inline std::vector<SeveritySample> collect_severity_samples(const std::vector<Trajectory>& trajectories,
                                                            const WeatherSeries& weather, const CaseSeries& cases,
                                                            const std::array<double, 3>& w_coeffs) {
  std::vector<SeveritySample> out;
  for (const auto& r : cases) {
    if (r.count <= 0) continue;
    const Date mid = week_midpoint(r.week_start);
    const long wi = weather.index_of(mid);
    if (wi < 0) continue;
    for (const auto& t : trajectories) {
      const long ti = t.index_of(mid);
      if (ti < 0) continue;
      out.push_back({t.mosquitoes[static_cast<std::size_t>(ti)],
                     weather_feature(w_coeffs, weather[static_cast<std::size_t>(wi)]), static_cast<double>(r.count)});
      break;
    }
  }
  return out;
}

/// Silverman's rule per axis (unweighted).
inline Bandwidth severity_bandwidth(const std::vector<SeveritySample>& samples) {
  const double n = static_cast<double>(samples.size());
  double mm = 0.0, mw = 0.0;
  for (const auto& s : samples) {
    mm += s.m;
    mw += s.w;
  }
  mm /= n;
  mw /= n;
  double vm = 0.0, vw = 0.0;
  for (const auto& s : samples) {
    vm += (s.m - mm) * (s.m - mm);
    vw += (s.w - mw) * (s.w - mw);
  }
  const double f = std::pow(n, -1.0 / 6.0);
  return {std::sqrt(vm / n) * f, std::sqrt(vw / n) * f};
}

/// Default grid: the sample range padded by three bandwidths.
inline Grid2D severity_grid(const std::vector<SeveritySample>& samples, Bandwidth h, std::size_t n) {
  double mlo = samples.front().m, mhi = mlo, wlo = samples.front().w, whi = wlo;
  for (const auto& s : samples) {
    mlo = std::min(mlo, s.m);
    mhi = std::max(mhi, s.m);
    wlo = std::min(wlo, s.w);
    whi = std::max(whi, s.w);
  }
  return Grid2D::span(mlo - 3 * h.x, mhi + 3 * h.x, wlo - 3 * h.y, whi + 3 * h.y, n, n);
}

inline double nw_rate(const std::vector<SeveritySample>& samples, Bandwidth h, double m, double w) {
  double num = 0.0, den = 0.0;
  for (const auto& s : samples) {
    const double u = (m - s.m) / h.x, v = (w - s.w) / h.y;
    const double k = std::exp(-0.5 * (u * u + v * v));
    num += k * s.x;
    den += k;
  }
  return den < kMinKernelWeight ? 0.0 : num / den;
}

inline RateSurface fit_rate_surface(std::vector<SeveritySample> samples, std::optional<Bandwidth> bandwidth,
                                    std::optional<Grid2D> grid = std::nullopt, int grid_n = 64) {
  if (samples.size() < 2) throw Error(Errc::TooFewSamples, std::to_string(samples.size()) + " severity samples");
  for (const auto& s : samples) {
    if (!std::isfinite(s.m) || !std::isfinite(s.w) || !std::isfinite(s.x)) throw Error(Errc::NonFiniteInput, "severity sample");
    if (s.m < 0.0 || s.x < 1.0) throw Error(Errc::InvariantViolation, "severity sample needs m >= 0 and x >= 1");
  }
  RateSurface rs;
  rs.bandwidth = bandwidth ? *bandwidth : severity_bandwidth(samples);
  if (!(rs.bandwidth.x > 0.0) || !(rs.bandwidth.y > 0.0))
    throw Error(Errc::ZeroBandwidth, "severity samples have no spread on one axis; set severity_bandwidth");
  rs.lambda = grid ? *grid : severity_grid(samples, rs.bandwidth, static_cast<std::size_t>(grid_n));
  for (std::size_t i = 0; i < rs.lambda.nx; ++i)
    for (std::size_t j = 0; j < rs.lambda.ny; ++j)
      rs.lambda.at(i, j) = nw_rate(samples, rs.bandwidth, rs.lambda.x(i), rs.lambda.y(j));
  rs.samples = std::move(samples);
  return rs;
}

inline double log_poisson_pmf(long x, double lambda) {
  if (lambda == 0.0) return x == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return -lambda + static_cast<double>(x) * std::log(lambda) - std::lgamma(static_cast<double>(x) + 1.0);
}

inline double poisson_pmf(long x, double lambda) {
  if (x < 0 || lambda < 0.0) throw Error(Errc::InvariantViolation, "poisson_pmf domain");
  if (lambda == 0.0) return x == 0 ? 1.0 : 0.0;
  if (x <= 20) {
    double f = 1.0;
    for (long k = 2; k <= x; ++k) f *= static_cast<double>(k);
    return std::exp(-lambda) * std::pow(lambda, static_cast<double>(x)) / f;
  }
  return std::exp(log_poisson_pmf(x, lambda));
}

struct CurvePoint {
  double m = 0.0;
  double w = 0.0;
};

/// Prior density on `grid`'s shape. Ridge sigma and band halfwidth are given
/// as fractions of each axis extent.
inline Grid2D build_prior(PriorKind kind, const std::vector<CurvePoint>& curve, Grid2D grid, double sigma = 0.05,
                          double halfwidth = 0.05) {
  const double ex = grid.x_hi() - grid.x0, ey = grid.y_hi() - grid.y0;
  std::fill(grid.values.begin(), grid.values.end(), 0.0);
  if (kind != PriorKind::uniform_box && curve.empty()) throw Error(Errc::EmptyCurve, "prior needs a (M,W) curve");

  switch (kind) {
    case PriorKind::uniform_box:
      std::fill(grid.values.begin(), grid.values.end(), 1.0);
      break;
    case PriorKind::gaussian_ridge: {
      const double sx = sigma * ex, sy = sigma * ey;
      for (std::size_t i = 0; i < grid.nx; ++i)
        for (std::size_t j = 0; j < grid.ny; ++j) {
          double s = 0.0;
          for (const auto& c : curve) {
            const double u = (grid.x(i) - c.m) / sx, v = (grid.y(j) - c.w) / sy;
            s += std::exp(-0.5 * (u * u + v * v));
          }
          grid.at(i, j) = s;
        }
      break;
    }
    case PriorKind::uniform_band: {
      for (std::size_t i = 0; i < grid.nx; ++i)
        for (std::size_t j = 0; j < grid.ny; ++j)
          for (const auto& c : curve) {
            const double u = (grid.x(i) - c.m) / ex, v = (grid.y(j) - c.w) / ey;
            if (std::sqrt(u * u + v * v) <= halfwidth) {
              grid.at(i, j) = 1.0;
              break;
            }
          }
      // a band narrower than a cell still covers the cells the curve passes through
      for (const auto& c : curve) {
        const CellIndex cell = nearest_cell(grid, c.m, c.w);
        grid.at(cell.i, cell.j) = 1.0;
      }
      break;
    }
  }
  const double mass = grid.mass();
  if (!(mass > 0.0) || !std::isfinite(mass)) throw Error(Errc::ZeroEvidence, "prior has no mass on the grid");
  for (double& v : grid.values) v /= mass;
  return grid;
}

struct PosteriorGrid {
  int x = 0;
  Grid2D density;
};

/// Cellwise prior * pmf(x, lambda), renormalized to unit grid mass. Computed in
/// log space so large x against small lambda does not underflow everywhere.
inline PosteriorGrid posterior(int x, const Grid2D& prior, const RateSurface& rate) {
  if (!prior.same_shape(rate.lambda)) throw Error(Errc::LengthMismatch, "prior and rate grids differ");
  PosteriorGrid post{x, prior};
  std::vector<double> logv(prior.size(), -std::numeric_limits<double>::infinity());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < prior.size(); ++c) {
    if (prior.values[c] <= 0.0) continue;
    logv[c] = std::log(prior.values[c]) + log_poisson_pmf(x, rate.lambda.values[c]);
    peak = std::max(peak, logv[c]);
  }
  if (!std::isfinite(peak)) throw Error(Errc::ZeroEvidence, "x=" + std::to_string(x));
  for (std::size_t c = 0; c < prior.size(); ++c) post.density.values[c] = std::exp(logv[c] - peak);
  const double mass = post.density.mass();
  for (double& v : post.density.values) v /= mass;
  return post;
}

inline std::vector<PosteriorGrid> build_posteriors(const Grid2D& prior, const RateSurface& rate, int x_max) {
  std::vector<PosteriorGrid> out;
  for (int x = 1; x <= x_max; ++x) out.push_back(posterior(x, prior, rate));
  return out;
}

inline constexpr double kMppTieTolerance = 1e-12;

struct MppResult {
  int x = 0;
  bool clamped = false;
};

/// argmax over candidate x of the posterior density at the point's cell.
/// Relative ties within kMppTieTolerance go to the smallest x.
inline MppResult mpp_predict(double m, double w, const std::vector<PosteriorGrid>& posteriors) {
  if (posteriors.empty()) throw Error(Errc::InsufficientData, "no posteriors");
  const CellIndex cell = nearest_cell(posteriors.front().density, m, w);
  MppResult best{posteriors.front().x, cell.clamped};
  double best_d = posteriors.front().density.at(cell.i, cell.j);
  for (const auto& p : posteriors) {
    const double d = p.density.at(cell.i, cell.j);
    if (d > best_d * (1.0 + kMppTieTolerance) || (best_d == 0.0 && d > 0.0)) {
      best_d = d;
      best.x = p.x;
    }
  }
  return best;
}

struct SeverityDay {
  Date date;
  double m = 0.0;
  double w = 0.0;
  int predicted = 0;
  bool clamped = false;
};

/// MPP per trajectory day. `gate` (optional, same length) zeroes days marked false.
inline std::vector<SeverityDay> estimate_severity(const Trajectory& traj, const WeatherSeries& weather,
                                                  const std::vector<PosteriorGrid>& posteriors,
                                                  const std::array<double, 3>& w_coeffs,
                                                  const std::vector<bool>* gate = nullptr) {
  std::vector<SeverityDay> out;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const long wi = weather.index_of(traj.dates[i]);
    if (wi < 0) throw Error(Errc::LengthMismatch, "no weather for " + format_date(traj.dates[i]));
    SeverityDay day{traj.dates[i], traj.mosquitoes[i], weather_feature(w_coeffs, weather[static_cast<std::size_t>(wi)])};
    if (gate && !(*gate)[i]) {
      out.push_back(day);
      continue;
    }
    const MppResult r = mpp_predict(day.m, day.w, posteriors);
    day.predicted = r.x;
    day.clamped = r.clamped;
    out.push_back(day);
  }
  return out;
}

inline std::string format_severity(const std::vector<SeverityDay>& days) {
  std::ostringstream out;
  out << "date,M,W,predicted_cases\n";
  for (const auto& d : days)
    out << format_date(d.date) << ',' << io::fmt(d.m) << ',' << io::fmt(d.w) << ',' << d.predicted << '\n';
  return out.str();
}

inline std::string format_posteriors(const std::vector<PosteriorGrid>& posts) {
  std::ostringstream out;
  out << "x,m,w,density\n";
  for (const auto& p : posts)
    for (std::size_t i = 0; i < p.density.nx; ++i)
      for (std::size_t j = 0; j < p.density.ny; ++j)
        out << p.x << ',' << io::fmt(p.density.x(i)) << ',' << io::fmt(p.density.y(j)) << ','
            << io::fmt(p.density.at(i, j)) << '\n';
  return out.str();
}

inline std::string format_severity_model(const RateSurface& rs) {
  std::ostringstream out;
  const Grid2D& g = rs.lambda;
  out << "[severity]\nversion = 1\n"
      << "bandwidth = " << io::fmt(rs.bandwidth.x) << ',' << io::fmt(rs.bandwidth.y) << '\n'
      << "grid = " << io::fmt(g.x0) << ',' << io::fmt(g.x_hi()) << ',' << io::fmt(g.y0) << ',' << io::fmt(g.y_hi())
      << ',' << g.nx << ',' << g.ny << '\n'
      << "[samples]\nm,w,x\n";
  for (const auto& s : rs.samples) out << io::fmt(s.m) << ',' << io::fmt(s.w) << ',' << io::fmt(s.x) << '\n';
  return out.str();
}

inline RateSurface parse_severity_model(const std::vector<std::string>& lines) {
  std::optional<Bandwidth> bw;
  std::optional<Grid2D> grid;
  std::vector<SeveritySample> samples;
  bool in_samples = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = io::trim(lines[i]);
    const std::string where = "severity model line " + std::to_string(i + 1);
    if (line.empty() || line == "[severity]" || line == "m,w,x") continue;
    if (line == "[samples]") {
      in_samples = true;
      continue;
    }
    std::vector<double> nums;
    const auto eq = line.find('=');
    const auto body = in_samples ? line : (eq == std::string_view::npos ? std::string_view{} : io::trim(line.substr(eq + 1)));
    for (auto tok : io::split(body)) {
      auto v = io::parse_double(tok);
      if (!v) throw Error(Errc::ParseError, where);
      nums.push_back(*v);
    }
    if (in_samples) {
      if (nums.size() != 3) throw Error(Errc::ParseError, where);
      samples.push_back({nums[0], nums[1], nums[2]});
      continue;
    }
    const auto key = io::trim(line.substr(0, eq));
    if (key == "version") continue;
    if (key == "bandwidth" && nums.size() == 2) bw = Bandwidth{nums[0], nums[1]};
    else if (key == "grid" && nums.size() == 6)
      grid = Grid2D::span(nums[0], nums[1], nums[2], nums[3], static_cast<std::size_t>(nums[4]),
                          static_cast<std::size_t>(nums[5]));
    else throw Error(Errc::ParseError, where);
  }
  if (!bw || !grid) throw Error(Errc::ParseError, "severity model header incomplete");
  return fit_rate_surface(std::move(samples), bw, grid);
}

}  // namespace spillcast
