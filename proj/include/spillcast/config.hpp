#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spillcast/epimodel.hpp"
#include "spillcast/error.hpp"
#include "spillcast/io.hpp"

namespace spillcast {

/// Initial condition used at the start of every simulated season.
struct InitialState {
  double humans = 1e6;
  double mosquito_eggs = 0.0;
  double aquatic = 1000.0;
  double mosquitoes = 3000.0;
  double infectious_mosquitoes = 0.0;
  double birds = 1000.0;
  double fledglings = 50.0;
  double infectious_birds = 1.0;

  CompartmentState to_state() const {
    CompartmentState s;
    s[Comp::HS] = humans;
    s[Comp::EM] = mosquito_eggs;
    s[Comp::AM] = aquatic;
    s[Comp::MS] = mosquitoes;
    s[Comp::MI] = infectious_mosquitoes;
    s[Comp::FB] = fledglings;
    s[Comp::BS] = birds;
    s[Comp::BI] = infectious_birds;
    return s;
  }
};

enum class FeatureTransform { identity, log1p_m };
enum class PriorKind { uniform_box, gaussian_ridge, uniform_band };

struct Bandwidth {
  double x = 0.0;
  double y = 0.0;
};

struct Config {
  // [thermal] + [model]
  ModelParams model;
  InitialState init;

  // [kde]
  std::optional<Bandwidth> onset_bandwidth;  // nullopt: weighted Silverman
  int onset_grid = 128;
  std::vector<double> contour_levels{0.88, 0.90, 0.95};
  FeatureTransform transform = FeatureTransform::identity;
  std::optional<Bandwidth> severity_bandwidth;
  int severity_grid = 64;

  // [forecast]
  int ar_order_long = 365;
  int lead_long = 365;
  int lead_short = 14;
  int k_ar_order = 14;
  std::vector<double> k_grid{1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000, 10000};
  int precip_bins = 4;
  int x_max = 30;
  std::array<double, 3> w_coeffs{1.0, 0.0, 0.0};  // W = a*T + b*H + c*P
  PriorKind prior = PriorKind::uniform_box;
  double prior_sigma = 0.05;     // fraction of each grid axis extent
  double band_halfwidth = 0.05;  // fraction of each grid axis extent
  bool severity_gate = false;
  int severity_start_day = 0;

  // [score]
  double score_floor = -10.0;
  double score_sigma = 1.5;
  int x_cap = 100;
  int nb_min_obs = 8;
};

namespace detail {

inline ThermalCurve parse_curve(const std::string& key, std::string_view value) {
  std::istringstream ss{std::string(value)};
  std::string kind;
  ss >> kind;
  auto number = [&]() {
    std::string tok;
    if (!(ss >> tok)) throw Error(Errc::InvariantViolation, key + ": missing coefficient");
    auto v = io::parse_double(tok);
    if (!v) throw Error(Errc::InvariantViolation, key + ": bad number '" + tok + "'");
    return *v;
  };
  if (kind == "constant") return ThermalCurve::constant(number());
  if (kind == "briere" || kind == "quadratic") {
    const double c = number(), lo = number(), hi = number();
    return kind == "briere" ? ThermalCurve::briere(c, lo, hi) : ThermalCurve::quadratic(c, lo, hi);
  }
  throw Error(Errc::InvariantViolation, key + ": curve kind must be briere|quadratic|constant");
}

inline double parse_number(const std::string& key, std::string_view value) {
  auto v = io::parse_double(value);
  if (!v) throw Error(Errc::InvariantViolation, key + ": bad number '" + std::string(value) + "'");
  return *v;
}

inline int parse_int(const std::string& key, std::string_view value) {
  auto v = io::parse_long(value);
  if (!v) throw Error(Errc::InvariantViolation, key + ": bad integer '" + std::string(value) + "'");
  return static_cast<int>(*v);
}

inline std::vector<double> parse_list(const std::string& key, std::string_view value) {
  std::vector<double> out;
  for (auto tok : io::split(value, ',')) out.push_back(parse_number(key, tok));
  return out;
}

inline std::optional<Bandwidth> parse_bandwidth(const std::string& key, std::string_view value) {
  if (io::trim(value) == "auto") return std::nullopt;
  auto v = parse_list(key, value);
  if (v.size() != 2) throw Error(Errc::InvariantViolation, key + ": expected 'auto' or 'h1,h2'");
  return Bandwidth{v[0], v[1]};
}

inline bool parse_bool(const std::string& key, std::string_view value) {
  value = io::trim(value);
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(Errc::InvariantViolation, key + ": expected true|false");
}

}  // namespace detail

/// Checks every configuration invariant; throws InvariantViolation(key).
inline void validate(const Config& cfg) {
  auto fail = [](const std::string& key) { throw Error(Errc::InvariantViolation, key); };
  const ModelParams& m = cfg.model;
  for (auto [name, curve] : {std::pair{"egg_laying", &m.egg_laying}, {"egg_hatch", &m.egg_hatch},
                             {"aquatic_development", &m.aquatic_development}, {"pdr", &m.pdr},
                             {"beta_bird_to_mosquito", &m.beta_bird_to_mosquito},
                             {"beta_mosquito_to_bird", &m.beta_mosquito_to_bird},
                             {"beta_mosquito_to_human", &m.beta_mosquito_to_human},
                             {"aquatic_lifespan", &m.aquatic_mortality.lifespan},
                             {"adult_lifespan", &m.adult_mortality.lifespan}}) {
    if (!(curve->c >= 0.0) || !std::isfinite(curve->t_min) || !std::isfinite(curve->t_max)) fail(name);
    if (curve->kind != ThermalCurve::Kind::constant && !(curve->t_min < curve->t_max)) fail(name);
  }
  const std::pair<const char*, double> rates[] = {
      {"egg_mortality", m.egg_mortality},       {"aquatic_max_mortality", m.aquatic_mortality.max_rate},
      {"adult_max_mortality", m.adult_mortality.max_rate},
      {"bird_laying", m.bird_laying},           {"bird_hatch", m.bird_hatch},
      {"bird_maturation", m.bird_maturation},   {"bird_mortality", m.bird_mortality},
      {"bird_incubation", m.bird_incubation},   {"bird_recovery", m.bird_recovery},
      {"bird_wnd_mortality", m.bird_wnd_mortality}, {"human_incubation", m.human_incubation},
      {"human_recovery", m.human_recovery}};
  for (auto [name, v] : rates)
    if (!(v >= 0.0) || !std::isfinite(v)) fail(name);
  if (!(m.adult_mortality.max_rate > 0.0)) fail("adult_max_mortality");
  if (!(m.bird_capacity > 0.0)) fail("bird_capacity");
  if (!(m.reporting_fraction > 0.0 && m.reporting_fraction <= 1.0)) fail("reporting_fraction");
  if (m.steps_per_day < 1) fail("steps_per_day");
  const InitialState& s = cfg.init;
  for (double v : {s.humans, s.mosquito_eggs, s.aquatic, s.mosquitoes, s.infectious_mosquitoes, s.birds,
                   s.fledglings, s.infectious_birds})
    if (!(v >= 0.0) || !std::isfinite(v)) fail("init");

  if (cfg.contour_levels.empty()) fail("contour_levels");
  for (std::size_t i = 0; i < cfg.contour_levels.size(); ++i) {
    const double l = cfg.contour_levels[i];
    if (!(l > 0.0 && l < 1.0)) fail("contour_levels");
    if (i > 0 && !(l > cfg.contour_levels[i - 1])) fail("contour_levels");
  }
  if (cfg.contour_levels.size() != 3) fail("contour_levels");
  for (auto [name, bw] : {std::pair{"onset_bandwidth", &cfg.onset_bandwidth},
                          {"severity_bandwidth", &cfg.severity_bandwidth}})
    if (*bw && !((*bw)->x > 0.0 && (*bw)->y > 0.0)) fail(name);
  if (cfg.onset_grid < 16) fail("onset_grid");
  if (cfg.severity_grid < 16) fail("severity_grid");
  if (cfg.ar_order_long < 1) fail("ar_order_long");
  if (cfg.lead_long < 1) fail("lead_long");
  if (cfg.lead_short < 1) fail("lead_short");
  if (cfg.k_ar_order < 1) fail("k_ar_order");
  if (cfg.k_grid.empty()) fail("k_grid");
  for (double k : cfg.k_grid)
    if (!(k > 0.0)) fail("k_grid");
  if (cfg.precip_bins < 1) fail("precip_bins");
  if (cfg.x_max < 1) fail("x_max");
  if (!(cfg.prior_sigma > 0.0)) fail("prior_sigma");
  if (!(cfg.band_halfwidth >= 0.0)) fail("band_halfwidth");
  if (cfg.severity_start_day < 0) fail("severity_start_day");
  if (!(cfg.score_floor < 0.0)) fail("score_floor");
  if (!(cfg.score_sigma >= 0.0)) fail("score_sigma");
  if (cfg.x_cap < cfg.x_max) fail("x_cap");
  if (cfg.nb_min_obs < 2) fail("nb_min_obs");
}

/// Parses INI text. Sections: [thermal] [model] [kde] [forecast] [score].
inline Config parse_config(const std::string& text) {
  Config cfg;
  ModelParams& m = cfg.model;
  using Setter = std::function<void(const std::string&, std::string_view)>;
  auto num = [](double& field) -> Setter {
    return [&field](const std::string& k, std::string_view v) { field = detail::parse_number(k, v); };
  };
  auto integer = [](int& field) -> Setter {
    return [&field](const std::string& k, std::string_view v) { field = detail::parse_int(k, v); };
  };
  auto curve = [](ThermalCurve& field) -> Setter {
    return [&field](const std::string& k, std::string_view v) { field = detail::parse_curve(k, v); };
  };

  const std::map<std::string, std::map<std::string, Setter>> table = {
      {"thermal",
       {{"egg_laying", curve(m.egg_laying)},
        {"egg_hatch", curve(m.egg_hatch)},
        {"aquatic_development", curve(m.aquatic_development)},
        {"aquatic_lifespan", curve(m.aquatic_mortality.lifespan)},
        {"adult_lifespan", curve(m.adult_mortality.lifespan)},
        {"pdr", curve(m.pdr)},
        {"beta_bird_to_mosquito", curve(m.beta_bird_to_mosquito)},
        {"beta_mosquito_to_bird", curve(m.beta_mosquito_to_bird)},
        {"beta_mosquito_to_human", curve(m.beta_mosquito_to_human)}}},
      {"model",
       {{"egg_mortality", num(m.egg_mortality)},
        {"aquatic_max_mortality", num(m.aquatic_mortality.max_rate)},
        {"adult_max_mortality", num(m.adult_mortality.max_rate)},
        {"bird_laying", num(m.bird_laying)},
        {"bird_hatch", num(m.bird_hatch)},
        {"bird_maturation", num(m.bird_maturation)},
        {"bird_mortality", num(m.bird_mortality)},
        {"bird_capacity", num(m.bird_capacity)},
        {"bird_incubation", num(m.bird_incubation)},
        {"bird_recovery", num(m.bird_recovery)},
        {"bird_wnd_mortality", num(m.bird_wnd_mortality)},
        {"human_incubation", num(m.human_incubation)},
        {"human_recovery", num(m.human_recovery)},
        {"reporting_fraction", num(m.reporting_fraction)},
        {"steps_per_day", integer(m.steps_per_day)},
        {"init_humans", num(cfg.init.humans)},
        {"init_mosquito_eggs", num(cfg.init.mosquito_eggs)},
        {"init_aquatic", num(cfg.init.aquatic)},
        {"init_mosquitoes", num(cfg.init.mosquitoes)},
        {"init_infectious_mosquitoes", num(cfg.init.infectious_mosquitoes)},
        {"init_birds", num(cfg.init.birds)},
        {"init_fledglings", num(cfg.init.fledglings)},
        {"init_infectious_birds", num(cfg.init.infectious_birds)}}},
      {"kde",
       {{"onset_bandwidth",
         [&](const std::string& k, std::string_view v) { cfg.onset_bandwidth = detail::parse_bandwidth(k, v); }},
        {"onset_grid", integer(cfg.onset_grid)},
        {"contour_levels",
         [&](const std::string& k, std::string_view v) { cfg.contour_levels = detail::parse_list(k, v); }},
        {"feature_transform",
         [&](const std::string& k, std::string_view v) {
           v = io::trim(v);
           if (v == "identity") cfg.transform = FeatureTransform::identity;
           else if (v == "log1p") cfg.transform = FeatureTransform::log1p_m;
           else throw Error(Errc::InvariantViolation, k + ": expected identity|log1p");
         }},
        {"severity_bandwidth",
         [&](const std::string& k, std::string_view v) { cfg.severity_bandwidth = detail::parse_bandwidth(k, v); }},
        {"severity_grid", integer(cfg.severity_grid)}}},
      {"forecast",
       {{"ar_order_long", integer(cfg.ar_order_long)},
        {"lead_long", integer(cfg.lead_long)},
        {"lead_short", integer(cfg.lead_short)},
        {"k_ar_order", integer(cfg.k_ar_order)},
        {"k_grid", [&](const std::string& k, std::string_view v) { cfg.k_grid = detail::parse_list(k, v); }},
        {"precip_bins", integer(cfg.precip_bins)},
        {"x_max", integer(cfg.x_max)},
        {"w_coeffs",
         [&](const std::string& k, std::string_view v) {
           auto list = detail::parse_list(k, v);
           if (list.size() != 3) throw Error(Errc::InvariantViolation, k + ": expected three coefficients");
           cfg.w_coeffs = {list[0], list[1], list[2]};
         }},
        {"prior",
         [&](const std::string& k, std::string_view v) {
           v = io::trim(v);
           if (v == "uniform") cfg.prior = PriorKind::uniform_box;
           else if (v == "gaussian") cfg.prior = PriorKind::gaussian_ridge;
           else if (v == "band") cfg.prior = PriorKind::uniform_band;
           else throw Error(Errc::InvariantViolation, k + ": expected uniform|gaussian|band");
         }},
        {"prior_sigma", num(cfg.prior_sigma)},
        {"band_halfwidth", num(cfg.band_halfwidth)},
        {"severity_gate",
         [&](const std::string& k, std::string_view v) { cfg.severity_gate = detail::parse_bool(k, v); }},
        {"severity_start_day", integer(cfg.severity_start_day)}}},
      {"score",
       {{"floor", num(cfg.score_floor)},
        {"sigma", num(cfg.score_sigma)},
        {"x_cap", integer(cfg.x_cap)},
        {"nb_min_obs", integer(cfg.nb_min_obs)}}},
  };

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = io::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(Errc::ParseError, "line " + std::to_string(line_no));
      section = std::string(io::trim(line.substr(1, line.size() - 2)));
      if (!table.contains(section)) throw Error(Errc::UnknownKey, "[" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::ParseError, "line " + std::to_string(line_no));
    const std::string key(io::trim(line.substr(0, eq)));
    const std::string_view value = io::trim(line.substr(eq + 1));
    if (section.empty()) throw Error(Errc::UnknownKey, key + " (outside any section)");
    const auto& keys = table.at(section);
    auto it = keys.find(key);
    if (it == keys.end()) throw Error(Errc::UnknownKey, section + "." + key);
    it->second(key, value);
  }
  validate(cfg);
  return cfg;
}

inline Config load_config(const std::filesystem::path& path) { return parse_config(io::read_file(path)); }

}  // namespace spillcast
