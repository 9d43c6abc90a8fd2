#include <gtest/gtest.h>

#include <filesystem>

#include "spillcast/ingest.hpp"

using namespace spillcast;

namespace {

std::vector<std::string> lines(std::initializer_list<const char*> l) { return {l.begin(), l.end()}; }

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::Usage;
}

}  // namespace

TEST(Weather, SingleRow) {
  const auto w = parse_weather(lines({"date,temp_mean,humidity,precip", "2020-01-01,12.5,60,0.0"}));
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].temp_mean, 12.5);
  EXPECT_EQ(w[0].humidity, 60.0);
  EXPECT_FALSE(w[0].interpolated);
}

TEST(Weather, OneDayGapInterpolated) {
  const auto w = parse_weather(
      lines({"date,temp_mean,humidity,precip", "2020-01-01,10,50,1", "2020-01-03,14,70,3"}));
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(format_date(w[1].date), "2020-01-02");
  EXPECT_DOUBLE_EQ(w[1].temp_mean, 12.0);
  EXPECT_DOUBLE_EQ(w[1].humidity, 60.0);
  EXPECT_DOUBLE_EQ(w[1].precip, 2.0);
  EXPECT_TRUE(w[1].interpolated);
}

TEST(Weather, InterpolationIsAffine) {
  const auto w = parse_weather(
      lines({"date,temp_mean,humidity,precip", "2020-01-01,0,0,0", "2020-01-05,8,40,4"}));
  ASSERT_EQ(w.size(), 5u);
  for (int k = 1; k < 4; ++k) {
    EXPECT_EQ(w[k].temp_mean, k / 4.0 * 8.0);
    EXPECT_EQ(w[k].humidity, k / 4.0 * 40.0);
    EXPECT_TRUE(w[k].interpolated);
  }
}

TEST(Weather, Errors) {
  EXPECT_EQ(code_of([] { parse_weather(lines({"date,temp_mean,humidity,precip", "2020-01-01,12,150,0"})); }),
            Errc::RangeViolation);
  EXPECT_EQ(code_of([] { parse_weather(lines({"date,temp_mean,humidity,precip", "2020-01-01,12,50,-1"})); }),
            Errc::RangeViolation);
  EXPECT_EQ(code_of([] { parse_weather(lines({"date,temp_mean,humidity,precip", "2020-01-01,x,50,0"})); }),
            Errc::ParseError);
  EXPECT_EQ(code_of([] { parse_weather(lines({"date,temp,humidity,precip"})); }), Errc::ParseError);
  EXPECT_EQ(code_of([] {
              parse_weather(lines({"date,temp_mean,humidity,precip", "2020-01-01,1,50,0", "2020-01-06,1,50,0"}));
            }),
            Errc::GapTooLong);
  EXPECT_EQ(code_of([] { load_weather("/nonexistent/weather.csv"); }), Errc::MissingFile);
}

TEST(Weather, RoundTripIsBitExact) {
  const auto w = load_weather(std::filesystem::path(SPILLCAST_DATA_DIR) / "weather_train.csv");
  std::vector<std::string> text;
  std::istringstream ss(format_weather(w));
  for (std::string l; std::getline(ss, l);) text.push_back(l);
  const auto back = parse_weather(text);
  ASSERT_EQ(back.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_EQ(back[i].date, w[i].date);
    EXPECT_EQ(back[i].temp_mean, w[i].temp_mean);
    EXPECT_EQ(back[i].humidity, w[i].humidity);
    EXPECT_EQ(back[i].precip, w[i].precip);
  }
}

TEST(Weather, SourceColumnAccepted) {
  const auto w = parse_weather(lines({"date,temp_mean,humidity,precip,source", "2020-01-01,1,2,3,forecast"}));
  EXPECT_EQ(w.size(), 1u);
}

TEST(Cases, SingleRow) {
  const auto c = parse_cases(lines({"week_start,count", "2020-06-01,3"}));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].count, 3);
}

TEST(Cases, MissingWeekZeroFilled) {
  const auto c = parse_cases(lines({"week_start,count", "2020-06-01,3", "2020-06-15,2"}));
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(format_date(c[1].week_start), "2020-06-08");
  EXPECT_EQ(c[1].count, 0);
  EXPECT_TRUE(c[1].filled);
}

TEST(Cases, Errors) {
  EXPECT_EQ(code_of([] { parse_cases(lines({"week_start,count", "2020-06-01,3", "2020-06-06,2"})); }),
            Errc::NonWeeklySpacing);
  EXPECT_EQ(code_of([] { parse_cases(lines({"week_start,count", "2020-06-01,-1"})); }), Errc::NegativeCount);
}
