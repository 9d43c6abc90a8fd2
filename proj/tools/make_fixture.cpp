// Regenerates the packaged synthetic fixture in data/.
//   make_fixture <out_dir>

#include <filesystem>
#include <iostream>

#include "spillcast/spillcast.hpp"
#include "synth.hpp"

using namespace spillcast;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixture <out_dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  const Config cfg;
  synth::Climate climate;
  climate.noise_sd = 0.4;

  // 2019..2021 train, 2022 target
  const WeatherSeries w = synth::weather(climate, 2019, 4, 20190101);
  const std::vector<double> k{6000, 7000, 5000, 6000};
  const Trajectory truth = synth::run_years(cfg.model, w, k, cfg.init.to_state());
  const CaseSeries c = synth::cases(truth, 7);

  io::write_file(dir / "weather_train.csv", format_weather(w.slice(year_start(2019), year_start(2022))));
  io::write_file(dir / "weather_target.csv", format_weather(w.year(2022)));
  io::write_file(dir / "weather_all.csv", format_weather(w));
  io::write_file(dir / "cases_train.csv", format_cases(c.before(year_start(2022))));
  io::write_file(dir / "cases_all.csv", format_cases(c));
  std::cout << "wrote fixture to " << dir << '\n';
  return 0;
}
