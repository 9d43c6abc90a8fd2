#pragma once

#include <algorithm>
#include <array>
#include <cmath>
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

/// Coordinates are stored after the feature transform.
struct OnsetSample {
  double m = 0.0;
  double r0 = 0.0;
  double weight = 1.0;
};

enum class RiskLevel { green = 0, low = 1, risky = 2, high = 3 };

inline const char* risk_name(RiskLevel r) {
  switch (r) {
    case RiskLevel::high: return "high";
    case RiskLevel::risky: return "risky";
    case RiskLevel::low: return "low";
    case RiskLevel::green: return "green";
  }
  return "green";
}

inline double transform_m(FeatureTransform t, double m) {
  return t == FeatureTransform::log1p_m ? std::log1p(std::max(m, 0.0)) : m;
}

struct OnsetPdf {
  std::vector<OnsetSample> samples;  // weights normalized to sum 1
  Bandwidth bandwidth;
  FeatureTransform transform = FeatureTransform::identity;
  Grid2D grid;  // density over (transformed m, r0)
  std::vector<double> levels;
  std::vector<double> thresholds;  // one per level, non-increasing

  /// KDE density at already-transformed coordinates.
  double density(double m, double r0) const {
    const double norm = 1.0 / (2.0 * std::numbers::pi * bandwidth.x * bandwidth.y);
    double s = 0.0;
    for (const auto& smp : samples) {
      const double u = (m - smp.m) / bandwidth.x, v = (r0 - smp.r0) / bandwidth.y;
      s += smp.weight * std::exp(-0.5 * (u * u + v * v));
    }
    return norm * s;
  }
};

struct OnsetCollection {
  std::vector<OnsetSample> samples;
  std::vector<int> years_without_cases;
};

/// One sample per year at the midpoint of the first nonzero case week.
inline OnsetCollection collect_onset_samples(const std::vector<Trajectory>& trajectories, const CaseSeries& cases,
                                             FeatureTransform transform = FeatureTransform::identity) {
  OnsetCollection out;
  std::vector<int> years;
  for (const auto& r : cases)
    if (years.empty() || years.back() != year_of(r.week_start)) years.push_back(year_of(r.week_start));

  for (int y : years) {
    const CaseRecord* first = nullptr;
    for (const auto& r : cases)
      if (year_of(r.week_start) == y && r.count > 0) {
        first = &r;
        break;
      }
    if (!first) {
      out.years_without_cases.push_back(y);
      continue;
    }
    const Date mid = week_midpoint(first->week_start);
    const Trajectory* traj = nullptr;
    long idx = -1;
    for (const auto& t : trajectories)
      if ((idx = t.index_of(mid)) >= 0) {
        traj = &t;
        break;
      }
    if (!traj) throw Error(Errc::InsufficientData, "no trajectory covers " + format_date(mid));
    const auto k = static_cast<std::size_t>(idx);
    out.samples.push_back({transform_m(transform, traj->mosquitoes[k]), traj->r0[k], static_cast<double>(first->count)});
  }
  return out;
}

/// Weighted Silverman rule: h = sigma_w * n_eff^(-1/6), n_eff = (sum w)^2 / sum w^2.
inline Bandwidth silverman_bandwidth(const std::vector<OnsetSample>& samples) {
  double sw = 0.0, sw2 = 0.0, mm = 0.0, mr = 0.0;
  for (const auto& s : samples) {
    sw += s.weight;
    sw2 += s.weight * s.weight;
    mm += s.weight * s.m;
    mr += s.weight * s.r0;
  }
  mm /= sw;
  mr /= sw;
  double vm = 0.0, vr = 0.0;
  for (const auto& s : samples) {
    vm += s.weight * (s.m - mm) * (s.m - mm);
    vr += s.weight * (s.r0 - mr) * (s.r0 - mr);
  }
  const double n_eff = sw * sw / sw2;
  const double factor = std::pow(n_eff, -1.0 / 6.0);
  return {std::sqrt(vm / sw) * factor, std::sqrt(vr / sw) * factor};
}

/// Largest density d with mass(cells >= d) >= level, per level. Mass is taken
/// relative to the grid total so a truncated tail does not shift the contours.
inline std::vector<double> hdr_thresholds(const Grid2D& grid, const std::vector<double>& levels) {
  std::vector<double> sorted = grid.values;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double total = 0.0;
  for (double v : sorted) total += v;
  if (!(total > 0.0)) throw Error(Errc::ZeroEvidence, "density grid has no mass");

  std::vector<double> out;
  for (double level : levels) {
    if (!(level > 0.0 && level <= 1.0)) throw Error(Errc::InvariantViolation, "HDR level outside (0,1]");
    double acc = 0.0;
    double threshold = sorted.back();
    for (double v : sorted) {
      acc += v;
      if (acc / total >= level) {
        threshold = v;
        break;
      }
    }
    out.push_back(threshold);
  }
  return out;
}

inline std::vector<double> hdr_thresholds(const OnsetPdf& pdf, const std::vector<double>& levels) {
  return hdr_thresholds(pdf.grid, levels);
}

inline OnsetPdf fit_onset_pdf(std::vector<OnsetSample> samples, std::optional<Bandwidth> bandwidth,
                              const std::vector<double>& levels = {0.88, 0.90, 0.95}, int grid_n = 128,
                              FeatureTransform transform = FeatureTransform::identity) {
  double total = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.m) || !std::isfinite(s.r0) || !std::isfinite(s.weight))
      throw Error(Errc::NonFiniteInput, "onset sample");
    if (s.weight < 0.0) throw Error(Errc::InvariantViolation, "negative onset weight");
    total += s.weight;
  }
  if (samples.size() < 2 || !(total > 0.0)) throw Error(Errc::TooFewSamples, std::to_string(samples.size()) + " onset samples");
  for (auto& s : samples) s.weight /= total;

  OnsetPdf pdf;
  pdf.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  if (!(pdf.bandwidth.x > 0.0) || !(pdf.bandwidth.y > 0.0))
    throw Error(Errc::ZeroBandwidth, "samples have no spread on one axis; set onset_bandwidth");
  pdf.samples = std::move(samples);
  pdf.transform = transform;
  pdf.levels = levels;

  auto [mlo, mhi] = std::minmax_element(pdf.samples.begin(), pdf.samples.end(),
                                        [](const auto& a, const auto& b) { return a.m < b.m; });
  auto [rlo, rhi] = std::minmax_element(pdf.samples.begin(), pdf.samples.end(),
                                        [](const auto& a, const auto& b) { return a.r0 < b.r0; });
  const auto n = static_cast<std::size_t>(grid_n);
  pdf.grid = Grid2D::span(mlo->m - 3 * pdf.bandwidth.x, mhi->m + 3 * pdf.bandwidth.x,
                          rlo->r0 - 3 * pdf.bandwidth.y, rhi->r0 + 3 * pdf.bandwidth.y, n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) pdf.grid.at(i, j) = pdf.density(pdf.grid.x(i), pdf.grid.y(j));
  pdf.thresholds = hdr_thresholds(pdf.grid, levels);
  return pdf;
}

/// Classifies an untransformed (M, R0) point. Boundaries are inclusive upward.
inline RiskLevel classify(const OnsetPdf& pdf, double m, double r0) {
  const double d = pdf.density(transform_m(pdf.transform, m), r0);
  if (d >= pdf.thresholds[0]) return RiskLevel::high;
  if (d >= pdf.thresholds[1]) return RiskLevel::risky;
  if (d >= pdf.thresholds[2]) return RiskLevel::low;
  return RiskLevel::green;
}

struct RiskDay {
  Date date;
  double m = 0.0;
  double r0 = 0.0;
  RiskLevel level = RiskLevel::green;
};

struct RiskSeries {
  std::vector<RiskDay> days;

  std::array<int, 4> counts() const {
    std::array<int, 4> c{};
    for (const auto& d : days) ++c[static_cast<std::size_t>(d.level)];
    return c;
  }
  int count(RiskLevel l) const { return counts()[static_cast<std::size_t>(l)]; }
};

inline RiskSeries forecast_onset(const OnsetPdf& pdf, const Trajectory& traj) {
  RiskSeries out;
  for (std::size_t i = 0; i < traj.size(); ++i)
    out.days.push_back({traj.dates[i], traj.mosquitoes[i], traj.r0[i], classify(pdf, traj.mosquitoes[i], traj.r0[i])});
  return out;
}

inline std::string format_risk_series(const RiskSeries& s) {
  std::ostringstream out;
  out << "date,M,R0,risk_level\n";
  for (const auto& d : s.days)
    out << format_date(d.date) << ',' << io::fmt(d.m) << ',' << io::fmt(d.r0) << ',' << risk_name(d.level) << '\n';
  const auto c = s.counts();
  out << "# counts high=" << c[3] << " risky=" << c[2] << " low=" << c[1] << " green=" << c[0] << '\n';
  return out.str();
}

inline std::string format_pdf_grid(const OnsetPdf& pdf) {
  std::ostringstream out;
  out << "m,r0,density\n";
  for (std::size_t i = 0; i < pdf.grid.nx; ++i)
    for (std::size_t j = 0; j < pdf.grid.ny; ++j)
      out << io::fmt(pdf.grid.x(i)) << ',' << io::fmt(pdf.grid.y(j)) << ',' << io::fmt(pdf.grid.at(i, j)) << '\n';
  return out.str();
}

/// Model file: INI header then the (transformed, normalized) samples. Loading
/// refits on the stored samples and bandwidth, which reproduces the grid.
inline std::string format_onset_model(const OnsetPdf& pdf) {
  std::ostringstream out;
  out << "[onset]\nversion = 1\n"
      << "transform = " << (pdf.transform == FeatureTransform::log1p_m ? "log1p" : "identity") << '\n'
      << "bandwidth = " << io::fmt(pdf.bandwidth.x) << ',' << io::fmt(pdf.bandwidth.y) << '\n'
      << "grid = " << pdf.grid.nx << '\n'
      << "levels = ";
  for (std::size_t i = 0; i < pdf.levels.size(); ++i) out << (i ? "," : "") << io::fmt(pdf.levels[i]);
  out << "\nthresholds = ";
  for (std::size_t i = 0; i < pdf.thresholds.size(); ++i) out << (i ? "," : "") << io::fmt(pdf.thresholds[i]);
  out << "\n[samples]\nm,r0,weight\n";
  for (const auto& s : pdf.samples) out << io::fmt(s.m) << ',' << io::fmt(s.r0) << ',' << io::fmt(s.weight) << '\n';
  return out.str();
}

inline OnsetPdf parse_onset_model(const std::vector<std::string>& lines) {
  std::optional<Bandwidth> bw;
  FeatureTransform transform = FeatureTransform::identity;
  std::vector<double> levels;
  int grid_n = 0;
  std::vector<OnsetSample> samples;
  bool in_samples = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = io::trim(lines[i]);
    const std::string where = "onset model line " + std::to_string(i + 1);
    if (line.empty() || line == "[onset]" || line == "m,r0,weight") continue;
    if (line == "[samples]") {
      in_samples = true;
      continue;
    }
    if (in_samples) {
      const auto f = io::split(line);
      auto m = f.size() == 3 ? io::parse_double(f[0]) : std::nullopt;
      auto r = f.size() == 3 ? io::parse_double(f[1]) : std::nullopt;
      auto w = f.size() == 3 ? io::parse_double(f[2]) : std::nullopt;
      if (!m || !r || !w) throw Error(Errc::ParseError, where);
      samples.push_back({*m, *r, *w});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::ParseError, where);
    const auto key = io::trim(line.substr(0, eq));
    const auto value = io::trim(line.substr(eq + 1));
    if (key == "version") {
      if (value != "1") throw Error(Errc::ParseError, where + ": unsupported version");
    } else if (key == "transform") {
      transform = value == "log1p" ? FeatureTransform::log1p_m : FeatureTransform::identity;
    } else if (key == "bandwidth") {
      auto v = io::split(value);
      auto x = v.size() == 2 ? io::parse_double(v[0]) : std::nullopt;
      auto y = v.size() == 2 ? io::parse_double(v[1]) : std::nullopt;
      if (!x || !y) throw Error(Errc::ParseError, where);
      bw = Bandwidth{*x, *y};
    } else if (key == "grid") {
      auto n = io::parse_long(value);
      if (!n) throw Error(Errc::ParseError, where);
      grid_n = static_cast<int>(*n);
    } else if (key == "levels") {
      for (auto tok : io::split(value)) {
        auto v = io::parse_double(tok);
        if (!v) throw Error(Errc::ParseError, where);
        levels.push_back(*v);
      }
    } else if (key != "thresholds") {
      throw Error(Errc::ParseError, where + ": unknown key");
    }
  }
  if (!bw || grid_n < 1 || levels.size() != 3) throw Error(Errc::ParseError, "onset model header incomplete");
  return fit_onset_pdf(std::move(samples), bw, levels, grid_n, transform);
}

}  // namespace spillcast
