#include <gtest/gtest.h>

#include <cmath>

#include "malcast/data/csv_io.hpp"
#include "malcast/synth/synthgen.hpp"

using namespace malcast;

namespace {

SynthConfig small(std::uint64_t seed = 11) {
  SynthConfig c;
  c.seed = seed;
  c.months = 48;
  return c;
}

}  // namespace

TEST(Generate, ShapeCoversAllOldProvinces) {
  const auto r = generate(small());
  EXPECT_EQ(r.truth.scheme(), Scheme::Old);
  EXPECT_EQ(r.truth.province_count(), 18u);
  EXPECT_EQ(r.truth.length(), 48u);
  EXPECT_EQ(r.truth.first_month(), (MonthKey{2010, 1}));
  EXPECT_EQ(r.truth.last_month(), (MonthKey{2013, 12}));
  EXPECT_EQ(r.truth.missing_climate_count(), 0u);
  for (const auto& rec : r.truth.records()) {
    EXPECT_GT(rec.population, 0);
    EXPECT_GE(rec.cases, 0);
    EXPECT_GE(*rec.rainfall, 0.0);
    EXPECT_GE(*rec.rel_humidity, 0.0);
    EXPECT_LE(*rec.rel_humidity, 100.0);
  }
}

TEST(Generate, FixedSeedIsBitIdentical) {
  const auto a = generate(small(5));
  const auto b = generate(small(5));
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.masked, b.masked);
  EXPECT_EQ(to_csv_string(a.masked), to_csv_string(b.masked));
  EXPECT_NE(generate(small(6)).truth, a.truth);
}

TEST(Generate, ZeroMissingnessLeavesMaskedEqualToTruth) {
  auto c = small();
  c.missingness = 0.0;
  const auto r = generate(c);
  EXPECT_EQ(r.masked, r.truth);
}

TEST(Generate, MaskingTouchesClimateOnly) {
  auto c = small();
  c.missingness = 0.3;
  const auto r = generate(c);
  const auto t = r.truth.records();
  const auto m = r.masked.records();
  ASSERT_EQ(t.size(), m.size());
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(m[i].population, t[i].population);
    EXPECT_EQ(m[i].cases, t[i].cases);
    if (m[i].temp_mean) {
      EXPECT_EQ(*m[i].temp_mean, *t[i].temp_mean);
    }
    if (m[i].rainfall) {
      EXPECT_EQ(*m[i].rainfall, *t[i].rainfall);
    }
    if (m[i].rel_humidity) {
      EXPECT_EQ(*m[i].rel_humidity, *t[i].rel_humidity);
    }
    dropped += !m[i].temp_mean + !m[i].rainfall + !m[i].rel_humidity;
  }
  EXPECT_EQ(dropped, r.masked.missing_climate_count());
  const double rate = static_cast<double>(dropped) / static_cast<double>(3 * t.size());
  // 2592 Bernoulli(0.3) draws: sd about 0.009.
  EXPECT_NEAR(rate, 0.3, 0.05);
}

TEST(Generate, MissingnessStreamDoesNotPerturbTruth) {
  auto c = small();
  c.missingness = 0.0;
  const auto clean = generate(c);
  c.missingness = 0.4;
  EXPECT_EQ(generate(c).truth, clean.truth);
}

TEST(Generate, DegenerateCaseModelGivesBaselineTimesPopulation) {
  auto c = small();
  c.case_noise = 0.0;
  c.lag_rain = c.lag_humidity = c.lag_temp = 0.0;
  const auto r = generate(c);
  for (const auto& rec : r.truth.records())
    EXPECT_EQ(rec.cases, std::llround(static_cast<double>(rec.population) * c.baseline_incidence)) << rec.province;
}

TEST(Generate, NoiselessCasesAreAFunctionOfLaggedClimate) {
  auto c = small();
  c.case_noise = 0.0;
  c.climate_noise = 0.0;
  c.provinces = {"Ngozi"};
  c.months = 60;
  c.population_growth = 0.0;
  const auto& s = generate(c).truth.series("Ngozi");
  // Same calendar month, different years: identical climate and lags, so
  // identical cases when population is flat and noise is off.
  for (std::size_t t = 2; t + 12 < s.size(); ++t) EXPECT_EQ(s[t].cases, s[t + 12].cases) << t;
  // Cases vary across the season when the lag coefficients are non-zero.
  std::int64_t lo = s[2].cases, hi = s[2].cases;
  for (std::size_t t = 2; t < 14; ++t) {
    lo = std::min(lo, s[t].cases);
    hi = std::max(hi, s[t].cases);
  }
  EXPECT_GT(hi, lo);
}

TEST(Generate, ClimateIsSeasonalWithPeriodTwelve) {
  auto c = small();
  c.climate_noise = 0.0;
  c.population_growth = 0.0;
  const auto r = generate(c);
  for (const auto& [name, s] : r.truth.all_series())
    for (std::size_t t = 0; t + 12 < s.size(); ++t) {
      EXPECT_NEAR(*s[t].temp_mean, *s[t + 12].temp_mean, 1e-9);
      EXPECT_NEAR(*s[t].rainfall, *s[t + 12].rainfall, 1e-9);
    }
}

TEST(Generate, CsvRoundTripPreservesDataset) {
  const auto r = generate(small());
  std::istringstream in(to_csv_string(r.masked));
  EXPECT_EQ(ingest_csv(in), r.masked);
}

TEST(SynthConfigTest, ValidateRejectsBadValues) {
  auto bad = [](auto mutate) {
    SynthConfig c;
    mutate(c);
    EXPECT_THROW(generate(c), ArgumentError);
  };
  bad([](SynthConfig& c) { c.months = 21; });
  bad([](SynthConfig& c) { c.missingness = 1.0; });
  bad([](SynthConfig& c) { c.missingness = -0.1; });
  bad([](SynthConfig& c) { c.case_noise = -1.0; });
  bad([](SynthConfig& c) { c.lag_rain = std::nan(""); });
  bad([](SynthConfig& c) { c.provinces.clear(); });
  bad([](SynthConfig& c) { c.population_max = c.population_min - 1; });
  SynthConfig ok;
  ok.months = 22;
  EXPECT_NO_THROW(generate(ok));
}

TEST(SynthConfigTest, FromKeysReadsPrefixedEntries) {
  const auto kv = KeyValues::parse_string(
      "synth.seed = 9\nsynth.months = 30\nsynth.missingness = 0.25\nsynth.provinces = Ngozi; Kayanza\n");
  const auto c = SynthConfig::from_keys(kv, "synth.");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.months, 30u);
  EXPECT_EQ(c.missingness, 0.25);
  EXPECT_EQ(c.provinces, (std::vector<std::string>{"Ngozi", "Kayanza"}));
  EXPECT_EQ(c.lag_rain, SynthConfig{}.lag_rain);
  EXPECT_THROW(SynthConfig::from_keys(KeyValues::parse_string("missingness = 2\n")), ArgumentError);
}
