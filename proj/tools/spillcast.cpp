// spillcast command-line front end.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "spillcast/spillcast.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace spillcast;

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

struct Globals {
  std::string config_path;
  unsigned long seed = 0;
  std::string out = "out";
};

/// Collects inputs and outputs for the run manifest.
class Run {
 public:
  Run(std::string command, const Globals& g) : command_(std::move(command)), g_(g) {
    if (!g.config_path.empty()) {
      config_text_ = io::read_file(g.config_path);
      cfg_ = parse_config(config_text_);
    }
  }

  const Config& cfg() const { return cfg_; }

  std::vector<std::string> lines(const std::string& path) {
    if (!fs::exists(path)) throw Error(Errc::MissingFile, path);
    const std::string text = io::read_file(path);
    inputs_.push_back({path, sha256_hex(text)});
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      out.push_back(std::move(line));
    }
    return out;
  }

  void write(const std::string& name, const std::string& content) {
    io::write_file(fs::path(g_.out) / name, content);
    outputs_.push_back({name, sha256_hex(content)});
  }

  void finish() {
    json m;
    m["command"] = command_;
    m["tool_version"] = SPILLCAST_VERSION;
    m["seed"] = g_.seed;
    m["config"] = {{"path", g_.config_path.empty() ? "(defaults)" : g_.config_path},
                   {"sha256", sha256_hex(config_text_)}};
    m["inputs"] = json::array();
    for (const auto& [p, h] : inputs_) m["inputs"].push_back({{"path", p}, {"sha256", h}});
    m["outputs"] = json::array();
    for (const auto& [p, h] : outputs_) m["outputs"].push_back({{"path", p}, {"sha256", h}});
    io::write_file(fs::path(g_.out) / "manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string command_;
  Globals g_;
  std::string config_text_;
  Config cfg_;
  std::vector<std::pair<std::string, std::string>> inputs_, outputs_;
};

std::string format_trajectory(const Trajectory& t, std::span<const double> k) {
  std::ostringstream out;
  out << "date,T,K,M,R0,new_cases";
  for (const char* name : kCompartmentNames) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << format_date(t.dates[i]) << ',' << io::fmt(t.temps[i]) << ',' << io::fmt(k[i]) << ','
        << io::fmt(t.mosquitoes[i]) << ',' << io::fmt(t.r0[i]) << ',' << io::fmt(t.new_cases[i]);
    for (double v : t.states[i].v) out << ',' << io::fmt(v);
    out << '\n';
  }
  return out.str();
}

std::string format_samples(const std::vector<OnsetSample>& s) {
  std::ostringstream out;
  out << "m,r0,weight\n";
  for (const auto& x : s) out << io::fmt(x.m) << ',' << io::fmt(x.r0) << ',' << io::fmt(x.weight) << '\n';
  return out.str();
}

std::string format_rate(const RateSurface& rs) {
  std::ostringstream out;
  out << "m,w,lambda\n";
  const Grid2D& g = rs.lambda;
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j)
      out << io::fmt(g.x(i)) << ',' << io::fmt(g.y(j)) << ',' << io::fmt(g.at(i, j)) << '\n';
  return out.str();
}

std::string model_file(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

Config with_prior(Config cfg, const std::string& prior) {
  if (prior == "gaussian") cfg.prior = PriorKind::gaussian_ridge;
  else if (prior == "band") cfg.prior = PriorKind::uniform_band;
  else if (prior == "uniform") cfg.prior = PriorKind::uniform_box;
  return cfg;
}

struct ForecastArgs {
  std::string model, weather, actual, mode = "long", prior;
  int lead = 0;
};

ForecastRun run_forecast(Run& run, const Config& cfg, const ForecastArgs& a) {
  const PlaneModel plane = parse_plane(run.lines(model_file(a.model, "plane.ini")));
  const WeatherSeries history = parse_weather(run.lines(a.weather));
  if (a.mode == "long") return forecast_long(history, plane, cfg, a.lead > 0 ? a.lead : cfg.lead_long);
  if (a.actual.empty()) throw Error(Errc::Usage, "--mode short needs --actual");
  const WeatherSeries actual = parse_weather(run.lines(a.actual));
  if (days_between(history.last_date(), actual.first_date()) != 1)
    throw Error(Errc::LengthMismatch, "--actual must start the day after --weather ends");
  return forecast_short(history, actual, plane, cfg, a.lead > 0 ? a.lead : cfg.lead_short);
}

std::vector<SeverityDay> parse_severity_csv(const std::vector<std::string>& lines) {
  if (lines.empty() || io::trim(lines[0]) != "date,M,W,predicted_cases")
    throw Error(Errc::ParseError, "line 1: expected header date,M,W,predicted_cases");
  std::vector<SeverityDay> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (io::trim(lines[i]).empty()) continue;
    const auto f = io::split(lines[i]);
    auto d = f.size() == 4 ? parse_date(f[0]) : std::nullopt;
    auto m = f.size() == 4 ? io::parse_double(f[1]) : std::nullopt;
    auto w = f.size() == 4 ? io::parse_double(f[2]) : std::nullopt;
    auto x = f.size() == 4 ? io::parse_long(f[3]) : std::nullopt;
    if (!d || !m || !w || !x) throw Error(Errc::ParseError, "predictions line " + std::to_string(i + 1));
    out.push_back({*d, *m, *w, static_cast<int>(*x)});
  }
  return out;
}

json totals(const ScoreReport& r) {
  return {{"TS", r.ts}, {"ZS", r.zs}, {"NZS", r.nzs}, {"weeks", r.weeks.size()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"West Nile virus spillover risk and severity forecasting"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "INI configuration file");
  app.add_option("--seed", g.seed, "seed recorded in the manifest");
  app.add_option("--out", g.out, "output directory");

  std::string weather, cases, k_mode = "plane", k_file, plane_file, model_dir, predictions, eval_model = "both", years;
  ForecastArgs fa;

  auto* sim = app.add_subcommand("simulate", "run the compartmental model on a weather series");
  sim->add_option("--weather", weather)->required();
  sim->add_option("--k", k_mode)->check(CLI::IsMember({"csv", "mean", "ar", "plane"}));
  sim->add_option("--k-file", k_file, "K series (csv) or K history (mean, ar)");
  sim->add_option("--plane", plane_file, "plane model (plane)");

  auto* fit_on = app.add_subcommand("fit-onset", "fit the onset PDF on historical weather and cases");
  auto* fit_sev = app.add_subcommand("fit-severity", "fit the Poisson rate surface");
  for (auto* c : {fit_on, fit_sev}) {
    c->add_option("--weather", weather)->required();
    c->add_option("--cases", cases)->required();
  }

  auto* pred_on = app.add_subcommand("predict-onset", "daily onset risk forecast");
  auto* pred_sev = app.add_subcommand("predict-severity", "daily severity forecast");
  auto* est_sev = app.add_subcommand("estimate-severity", "severity on observed weather");
  for (auto* c : {pred_on, pred_sev, est_sev}) {
    c->add_option("--model", fa.model, "directory written by a fit command")->required();
    c->add_option("--weather", fa.weather, est_sev == c ? "observed weather" : "history weather")->required();
  }
  for (auto* c : {pred_on, pred_sev}) {
    c->add_option("--mode", fa.mode)->check(CLI::IsMember({"long", "short"}));
    c->add_option("--lead", fa.lead, "forecast lead in days");
    c->add_option("--actual", fa.actual, "observed target-period weather (short mode)");
  }
  for (auto* c : {pred_sev, est_sev}) c->add_option("--prior", fa.prior)->check(CLI::IsMember({"uniform", "gaussian", "band"}));

  auto* eval = app.add_subcommand("evaluate", "log-score weekly predictions");
  eval->add_option("--predictions", predictions, "severity CSV")->required();
  eval->add_option("--cases", cases)->required();
  eval->add_option("--model", eval_model)->check(CLI::IsMember({"bayes", "nb", "both"}));

  auto* trend = app.add_subcommand("trend", "annual high-risk indicators and their trend");
  trend->add_option("--weather", weather)->required();
  trend->add_option("--model", model_dir)->required();
  trend->add_option("--years", years, "A..B");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    Run run(cmd->get_name(), g);
    const Config& base = run.cfg();

    if (cmd == sim) {
      const WeatherSeries w = parse_weather(run.lines(weather));
      KSeries k;
      if (k_mode == "plane") {
        if (plane_file.empty()) throw Error(Errc::Usage, "--k plane needs --plane");
        k = predict_K_plane(parse_plane(run.lines(plane_file)), w);
      } else {
        if (k_file.empty()) throw Error(Errc::Usage, "--k " + k_mode + " needs --k-file");
        const KSeries src = parse_kseries(run.lines(k_file));
        if (k_mode == "csv") k = src;
        else if (k_mode == "mean") {
          std::vector<Date> dates;
          for (const auto& r : w) dates.push_back(r.date);
          k = predict_K_mean(src, dates);
        } else {
          if (src.empty() || days_between(src.dates.back(), w.first_date()) != 1)
            throw Error(Errc::LengthMismatch, "--k ar: weather must start the day after the K history ends");
          k = predict_K_ar(src, static_cast<int>(w.size()), base.k_ar_order);
        }
      }
      require_aligned(k, w);
      const Trajectory t = simulate(base.model, w, simulation_capacity(k), base.init.to_state());
      run.write("trajectory.csv", format_trajectory(t, k.k));
    } else if (cmd == fit_on || cmd == fit_sev) {
      const WeatherSeries w = parse_weather(run.lines(weather));
      const CaseSeries c = parse_cases(run.lines(cases));
      const HistoryFit fit = fit_history(w, c, base);
      run.write("k_calibrated.csv", format_kseries(fit.k));
      run.write("plane.ini", format_plane(fit.plane));
      if (cmd == fit_on) {
        std::vector<int> skipped;
        const OnsetPdf pdf = fit_onset(fit, c, base, &skipped);
        for (int y : skipped) std::cerr << "warning: NoCasesInYear: " << y << " contributes no onset sample\n";
        run.write("onset_model.ini", format_onset_model(pdf));
        run.write("onset_samples.csv", format_samples(pdf.samples));
        run.write("onset_pdf.csv", format_pdf_grid(pdf));
      } else {
        const RateSurface rs = fit_severity(fit, w, c, base);
        run.write("severity_model.ini", format_severity_model(rs));
        run.write("rate_surface.csv", format_rate(rs));
      }
    } else if (cmd == pred_on) {
      const OnsetPdf pdf = parse_onset_model(run.lines(model_file(fa.model, "onset_model.ini")));
      const ForecastRun fr = run_forecast(run, base, fa);
      run.write("risk.csv", format_risk_series(forecast_onset(pdf, fr.traj)));
      run.write("weather_forecast.csv", format_weather(fr.weather));
    } else if (cmd == pred_sev || cmd == est_sev) {
      const Config cfg = with_prior(base, fa.prior);
      const RateSurface rs = parse_severity_model(run.lines(model_file(fa.model, "severity_model.ini")));
      std::optional<OnsetPdf> gate;
      if (cfg.severity_gate) gate = parse_onset_model(run.lines(model_file(fa.model, "onset_model.ini")));
      ForecastRun fr;
      if (cmd == est_sev) {
        fr.weather = parse_weather(run.lines(fa.weather));
        fr.traj = simulate_plane(cfg, parse_plane(run.lines(model_file(fa.model, "plane.ini"))), fr.weather,
                                 cfg.init.to_state());
      } else {
        fr = run_forecast(run, cfg, fa);
      }
      const auto days = severity_for_run(fr, rs, cfg, gate ? &*gate : nullptr);
      run.write("severity.csv", format_severity(days));
    } else if (cmd == eval) {
      const auto preds = parse_severity_csv(run.lines(predictions));
      const CaseSeries c = parse_cases(run.lines(cases));
      if (preds.empty()) throw Error(Errc::InsufficientData, "no predictions");
      std::map<Date, int> by_day;
      for (const auto& d : preds) by_day[d.date] = d.predicted;
      std::vector<PredictiveDist> bayes, nb;
      std::vector<CaseRecord> weeks;
      for (std::size_t i = 0; i < c.size(); ++i) {
        auto it = by_day.find(week_midpoint(c[i].week_start));
        if (it == by_day.end() || i < static_cast<std::size_t>(base.nb_min_obs)) continue;
        std::vector<double> window;
        for (std::size_t j = 0; j < i; ++j) window.push_back(static_cast<double>(c[j].count));
        bayes.push_back(bayesian_predictive(it->second, base.score_sigma, base.x_cap, c[i].week_start));
        nb.push_back(nb_one_step(window, base.x_cap, static_cast<std::size_t>(base.nb_min_obs), c[i].week_start));
        weeks.push_back(c[i]);
      }
      if (weeks.empty()) throw Error(Errc::InsufficientData, "no case week overlaps the predictions");
      const CaseSeries scored(weeks);
      std::vector<ScoreReport> reports;
      if (eval_model != "nb") reports.push_back(score_run(bayes, scored, base.score_floor, "bayes"));
      if (eval_model != "bayes") reports.push_back(score_run(nb, scored, base.score_floor, "nb"));
      json summary;
      for (const auto& r : reports) summary[r.model] = totals(r);
      summary["score_floor"] = base.score_floor;
      if (eval_model != "nb")
        summary["bayes_distribution"] = "MPP point prediction widened by a discretized Gaussian, sigma=" +
                                        io::fmt(base.score_sigma);
      run.write("scores.csv", format_scores(reports));
      run.write("summary.json", summary.dump(2) + "\n");
    } else if (cmd == trend) {
      WeatherSeries w = parse_weather(run.lines(weather));
      if (!years.empty()) {
        const auto dots = years.find("..");
        const auto a = dots == std::string::npos ? std::nullopt : io::parse_long(years.substr(0, dots));
        const auto b = dots == std::string::npos ? std::nullopt : io::parse_long(years.substr(dots + 2));
        if (!a || !b || *b < *a) throw Error(Errc::Usage, "--years expects A..B");
        if (*b - *a + 1 < 3) throw Error(Errc::TooFewYears, "--years spans fewer than 3 years");
        w = w.slice(year_start(static_cast<int>(*a)), year_start(static_cast<int>(*b) + 1));
        if (w.empty()) throw Error(Errc::InsufficientData, "no weather in --years");
      }
      const OnsetPdf pdf = parse_onset_model(run.lines(model_file(model_dir, "onset_model.ini")));
      const PlaneModel plane = parse_plane(run.lines(model_file(model_dir, "plane.ini")));
      const TrendReport rep = trend_report(w, pdf, base.model, plane, base.init.to_state());
      auto result = [](const TrendResult& r) {
        return json{{"slope", r.slope}, {"intercept", r.intercept}, {"slope_se", r.slope_se},
                    {"p_value", r.p_value}, {"ks_p_value", r.ks_p_value}};
      };
      run.write("trend.csv", format_trend(rep));
      run.write("trend.json", json{{"r_year", result(rep.r_year)}, {"r_relative", result(rep.r_relative)}}.dump(2) + "\n");
    }
    run.finish();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_numerical(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
