#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "malcast/core/keyvalue.hpp"
#include "malcast/core/rng.hpp"
#include "malcast/data/aggregate.hpp"
#include "malcast/data/dataset.hpp"
#include "malcast/error.hpp"

namespace malcast {

/// Parameters of the synthetic province generator. Per-province climate
/// levels, amplitudes, phases and populations are jittered from `seed`
/// around the values below.
struct SynthConfig {
  std::uint64_t seed = 2010;
  MonthKey start{2010, 1};
  std::size_t months = 156;
  std::vector<std::string> provinces{kOldProvinces.begin(), kOldProvinces.end()};

  double temp_base = 20.0;  // deg C
  double temp_amplitude = 2.0;
  double rain_base = 110.0;  // mm / month
  double rain_amplitude = 80.0;
  double humidity_base = 72.0;  // %
  double humidity_amplitude = 10.0;
  double phase_jitter = 1.0;  // months, +/- around a shared rainy-season phase

  /// Climate noise standard deviation as a fraction of each amplitude.
  double climate_noise = 0.15;
  /// Log-scale overdispersion of case counts; 0 gives deterministic counts.
  double case_noise = 0.1;

  double baseline_incidence = 0.03;  // cases per person per month
  double lag_rain = 0.5;             // rainfall anomaly, one month earlier
  double lag_humidity = 0.2;         // humidity anomaly, one month earlier
  double lag_temp = 0.4;             // temperature anomaly, two months earlier

  std::int64_t population_min = 250'000;
  std::int64_t population_max = 900'000;
  double population_growth = 0.03;  // per year

  double missingness = 0.1;  // share of climate cells removed in the masked copy

  static constexpr std::size_t kMinMonths = 22;  // default lookback + 10

  void validate() const {
    if (months < kMinMonths) throw ArgumentError("synth: months must be >= " + std::to_string(kMinMonths));
    if (provinces.empty()) throw ArgumentError("synth: no provinces");
    if (!start.valid()) throw ArgumentError("synth: start month out of range");
    if (!(missingness >= 0.0 && missingness < 1.0)) throw ArgumentError("synth: missingness must lie in [0, 1)");
    if (climate_noise < 0.0 || case_noise < 0.0) throw ArgumentError("synth: noise levels must be >= 0");
    if (baseline_incidence < 0.0) throw ArgumentError("synth: baseline incidence must be >= 0");
    if (population_min <= 0 || population_max < population_min)
      throw ArgumentError("synth: population range must be positive and ordered");
    for (double v : {temp_base, temp_amplitude, rain_base, rain_amplitude, humidity_base, humidity_amplitude,
                     phase_jitter, lag_rain, lag_humidity, lag_temp, population_growth})
      if (!std::isfinite(v)) throw ArgumentError("synth: coefficients must be finite");
    if (temp_amplitude <= 0.0 || rain_amplitude <= 0.0 || humidity_amplitude <= 0.0)
      throw ArgumentError("synth: climate amplitudes must be > 0");
  }

  /// Reads `<prefix>key = value` entries; absent keys keep their defaults.
  static SynthConfig from_keys(const KeyValues& kv, const std::string& prefix = "") {
    SynthConfig c;
    auto real = [&](const char* k, double& dst) { dst = kv.real_or(prefix + k, dst); };
    c.seed = kv.uint_or(prefix + "seed", c.seed);
    c.months = kv.uint_or(prefix + "months", c.months);
    c.start.year = static_cast<int>(kv.uint_or(prefix + "start_year", static_cast<std::uint64_t>(c.start.year)));
    c.start.month = static_cast<int>(kv.uint_or(prefix + "start_month", static_cast<std::uint64_t>(c.start.month)));
    real("temp_base", c.temp_base);
    real("temp_amplitude", c.temp_amplitude);
    real("rain_base", c.rain_base);
    real("rain_amplitude", c.rain_amplitude);
    real("humidity_base", c.humidity_base);
    real("humidity_amplitude", c.humidity_amplitude);
    real("phase_jitter", c.phase_jitter);
    real("climate_noise", c.climate_noise);
    real("case_noise", c.case_noise);
    real("baseline_incidence", c.baseline_incidence);
    real("lag_rain", c.lag_rain);
    real("lag_humidity", c.lag_humidity);
    real("lag_temp", c.lag_temp);
    real("population_growth", c.population_growth);
    real("missingness", c.missingness);
    c.population_min = static_cast<std::int64_t>(kv.uint_or(prefix + "population_min", c.population_min));
    c.population_max = static_cast<std::int64_t>(kv.uint_or(prefix + "population_max", c.population_max));
    if (auto p = kv.get(prefix + "provinces")) {
      c.provinces.clear();
      std::size_t start = 0;
      while (start <= p->size()) {
        auto end = p->find(';', start);
        if (end == std::string::npos) end = p->size();
        auto name = std::string(text::trim(std::string_view(*p).substr(start, end - start)));
        if (!name.empty()) c.provinces.push_back(name);
        start = end + 1;
      }
    }
    c.validate();
    return c;
  }
};

struct SynthResult {
  Dataset truth;
  Dataset masked;
};

/// Seeded synthetic monthly data with known ground truth.
///
/// Climate per province is a period-12 sinusoid plus Gaussian noise.
/// Cases follow
///   rate(t) = population(t) * incidence
///             * exp(lag_rain * zr(t-1) + lag_humidity * zh(t-1) + lag_temp * zt(t-2))
/// with z the climate anomaly over its amplitude; counts are rate rounded
/// (case_noise = 0) or Poisson with log-normal overdispersion. The masked copy
/// drops climate cells independently with probability `missingness`.
inline SynthResult generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng province_rng(derive_seed(cfg.seed, "provinces"));
  Rng climate_rng(derive_seed(cfg.seed, "climate"));
  Rng case_rng(derive_seed(cfg.seed, "cases"));
  Rng mask_rng(derive_seed(cfg.seed, "mask"));

  struct Profile {
    double temp_base, temp_amp, rain_base, rain_amp, hum_base, hum_amp, phase;
    std::int64_t population;
  };
  std::vector<Profile> profiles;
  const bool jitter_phase = cfg.phase_jitter > 0.0;
  for (std::size_t p = 0; p < cfg.provinces.size(); ++p) {
    Profile pr{};
    pr.temp_base = cfg.temp_base + province_rng.uniform(-2.0, 2.0);
    pr.temp_amp = cfg.temp_amplitude * province_rng.uniform(0.8, 1.2);
    pr.rain_base = cfg.rain_base * province_rng.uniform(0.85, 1.15);
    pr.rain_amp = std::min(cfg.rain_amplitude * province_rng.uniform(0.8, 1.2), pr.rain_base);
    pr.hum_base = cfg.humidity_base + province_rng.uniform(-4.0, 4.0);
    pr.hum_amp = cfg.humidity_amplitude * province_rng.uniform(0.8, 1.2);
    pr.phase = jitter_phase ? province_rng.uniform(-cfg.phase_jitter, cfg.phase_jitter) : 0.0;
    const double span = static_cast<double>(cfg.population_max - cfg.population_min);
    pr.population = cfg.population_min + static_cast<std::int64_t>(std::floor(province_rng.uniform01() * span));
    profiles.push_back(pr);
  }

  const MonthKey last = cfg.start.plus(static_cast<long>(cfg.months) - 1);
  AnnualPopulation annual;
  for (std::size_t p = 0; p < cfg.provinces.size(); ++p)
    for (int y = cfg.start.year; y <= last.year; ++y)
      annual[{cfg.provinces[p], y}] = static_cast<std::int64_t>(
          std::llround(static_cast<double>(profiles[p].population) * std::pow(1.0 + cfg.population_growth, y - cfg.start.year)));
  const auto monthly_pop = expand_population(annual, cfg.start, last);

  constexpr std::size_t kLead = 2;  // unpublished months feeding the first lags
  std::vector<MonthlyRecord> truth;
  for (std::size_t p = 0; p < cfg.provinces.size(); ++p) {
    const auto& pr = profiles[p];
    const std::size_t total = cfg.months + kLead;
    std::vector<double> temp(total), rain(total), hum(total);
    for (std::size_t k = 0; k < total; ++k) {
      const MonthKey m = cfg.start.plus(static_cast<long>(k) - static_cast<long>(kLead));
      // Rainy season peaks around month 3; temperature leads it slightly.
      const double angle = 2.0 * std::numbers::pi * ((m.month - 1) + pr.phase) / 12.0;
      const double season = std::cos(angle - 2.0 * std::numbers::pi * 2.0 / 12.0);
      const double warm = std::cos(angle - 2.0 * std::numbers::pi * 1.0 / 12.0);
      temp[k] = pr.temp_base + pr.temp_amp * (warm + cfg.climate_noise * climate_rng.normal());
      rain[k] = std::max(0.0, pr.rain_base + pr.rain_amp * (season + cfg.climate_noise * climate_rng.normal()));
      hum[k] = std::clamp(pr.hum_base + pr.hum_amp * (season + cfg.climate_noise * climate_rng.normal()), 0.0, 100.0);
    }
    const auto& pops = monthly_pop.at(cfg.provinces[p]);
    for (std::size_t t = 0; t < cfg.months; ++t) {
      const std::size_t k = t + kLead;
      const double zr = (rain[k - 1] - pr.rain_base) / pr.rain_amp;
      const double zh = (hum[k - 1] - pr.hum_base) / pr.hum_amp;
      const double zt = (temp[k - 2] - pr.temp_base) / pr.temp_amp;
      double rate = static_cast<double>(pops[t]) * cfg.baseline_incidence *
                    std::exp(cfg.lag_rain * zr + cfg.lag_humidity * zh + cfg.lag_temp * zt);
      std::int64_t cases;
      if (cfg.case_noise == 0.0) {
        cases = std::llround(rate);
      } else {
        const double shock = std::exp(cfg.case_noise * case_rng.normal() - 0.5 * cfg.case_noise * cfg.case_noise);
        cases = case_rng.poisson(rate * shock);
      }
      MonthlyRecord r;
      r.province = cfg.provinces[p];
      r.month = cfg.start.plus(static_cast<long>(t));
      r.temp_mean = temp[k];
      r.rainfall = rain[k];
      r.rel_humidity = hum[k];
      r.population = pops[t];
      r.cases = cases;
      truth.push_back(std::move(r));
    }
  }

  std::vector<MonthlyRecord> masked = truth;
  if (cfg.missingness > 0.0) {
    for (auto& r : masked) {
      if (mask_rng.uniform01() < cfg.missingness) r.temp_mean.reset();
      if (mask_rng.uniform01() < cfg.missingness) r.rainfall.reset();
      if (mask_rng.uniform01() < cfg.missingness) r.rel_humidity.reset();
    }
  }
  const Scheme scheme = std::all_of(cfg.provinces.begin(), cfg.provinces.end(),
                                    [](const std::string& p) { return is_new_province(p) && !is_old_province(p); })
                            ? Scheme::New
                            : Scheme::Old;
  return {Dataset::from_records(scheme, std::move(truth)), Dataset::from_records(scheme, std::move(masked))};
}

}  // namespace malcast
