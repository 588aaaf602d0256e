#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "malcast/core/keyvalue.hpp"
#include "malcast/core/text.hpp"
#include "malcast/impute/missforest.hpp"
#include "malcast/lstm/trainer.hpp"
#include "malcast/synth/synthgen.hpp"

namespace malcast {

inline constexpr const char* kOutDirEnv = "MALCAST_OUT_DIR";

inline std::string default_out_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return env && *env ? std::string(env) : std::string("malcast_out");
}

/// Label-derived stage seeds, so each stage reproduces on its own from the
/// single global seed.
inline std::uint64_t impute_seed(std::uint64_t global) { return derive_seed(global, "impute"); }
inline std::uint64_t synth_seed(std::uint64_t global) { return derive_seed(global, "synth"); }
inline std::uint64_t train_seed(std::uint64_t global, const std::string& region, Variant v) {
  return derive_seed(global, "train/" + region + "/" + std::string(to_string(v)));
}

struct PipelineConfig {
  std::string input;  // old-scheme monthly CSV; empty = synthesize
  std::string map;    // redistricting CSV; empty = built-in
  std::string out_dir = default_out_dir();
  std::uint64_t seed = 1;
  SynthConfig synth;
  bool synth_seed_set = false;
  MissForestParams impute;
  std::size_t lookback = 12;
  double train_fraction = 0.8;
  bool recursive = false;
  TrainConfig train;

  /// Every key the pipeline understands (synth.* keys included).
  static const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "input", "map", "out_dir", "seed",
        "window.lookback", "window.train_fraction", "window.recursive",
        "train.hidden", "train.epochs", "train.learning_rate", "train.beta1", "train.beta2", "train.epsilon",
        "train.batch_size", "train.clip_norm",
        "impute.n_trees", "impute.mtry", "impute.min_samples_leaf", "impute.max_depth", "impute.max_iter",
        "synth.seed", "synth.months", "synth.start_year", "synth.start_month", "synth.provinces",
        "synth.temp_base", "synth.temp_amplitude", "synth.rain_base", "synth.rain_amplitude",
        "synth.humidity_base", "synth.humidity_amplitude", "synth.phase_jitter", "synth.climate_noise",
        "synth.case_noise", "synth.baseline_incidence", "synth.lag_rain", "synth.lag_humidity", "synth.lag_temp",
        "synth.population_min", "synth.population_max", "synth.population_growth", "synth.missingness"};
    return keys;
  }

  static PipelineConfig from_keys(const KeyValues& kv) {
    const auto& known = known_keys();
    for (const auto& [k, v] : kv.entries())
      if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");
    PipelineConfig c;
    c.input = kv.get_or("input", "");
    c.map = kv.get_or("map", "");
    c.out_dir = kv.get_or("out_dir", c.out_dir);
    c.seed = kv.uint_or("seed", c.seed);
    c.synth = SynthConfig::from_keys(kv, "synth.");
    c.synth_seed_set = kv.has("synth.seed");
    if (!c.synth_seed_set) c.synth.seed = synth_seed(c.seed);
    c.lookback = kv.uint_or("window.lookback", c.lookback);
    c.train_fraction = kv.real_or("window.train_fraction", c.train_fraction);
    const auto rec = kv.get_or("window.recursive", "false");
    if (rec != "true" && rec != "false") throw ConfigError("key 'window.recursive': expected true|false");
    c.recursive = rec == "true";
    c.train.hidden = kv.uint_or("train.hidden", c.train.hidden);
    c.train.epochs = kv.uint_or("train.epochs", c.train.epochs);
    c.train.learning_rate = kv.real_or("train.learning_rate", c.train.learning_rate);
    c.train.beta1 = kv.real_or("train.beta1", c.train.beta1);
    c.train.beta2 = kv.real_or("train.beta2", c.train.beta2);
    c.train.epsilon = kv.real_or("train.epsilon", c.train.epsilon);
    c.train.batch_size = kv.uint_or("train.batch_size", c.train.batch_size);
    c.train.clip_norm = kv.real_or("train.clip_norm", c.train.clip_norm);
    c.impute.forest.n_trees = kv.uint_or("impute.n_trees", c.impute.forest.n_trees);
    c.impute.forest.tree.mtry = kv.uint_or("impute.mtry", c.impute.forest.tree.mtry);
    c.impute.forest.tree.min_samples_leaf = kv.uint_or("impute.min_samples_leaf", c.impute.forest.tree.min_samples_leaf);
    c.impute.forest.tree.max_depth = kv.uint_or("impute.max_depth", c.impute.forest.tree.max_depth);
    c.impute.max_iter = kv.uint_or("impute.max_iter", c.impute.max_iter);
    c.validate();
    return c;
  }

  void validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw ConfigError("window.train_fraction must lie in (0, 1)");
    if (lookback < 1) throw ConfigError("window.lookback must be >= 1");
    if (impute.max_iter < 1) throw ConfigError("impute.max_iter must be >= 1");
    if (impute.forest.n_trees < 1) throw ConfigError("impute.n_trees must be >= 1");
    try {
      train.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
  }

  /// The configuration as actually used, in canonical key order. The output
  /// directory is left out so runs into different directories stay
  /// byte-comparable.
  KeyValues effective() const {
    KeyValues kv;
    auto real = [](double v) { return text::format_real(v); };
    kv.set("input", input);
    kv.set("map", map);
    kv.set("seed", std::to_string(seed));
    kv.set("window.lookback", std::to_string(lookback));
    kv.set("window.train_fraction", real(train_fraction));
    kv.set("window.recursive", recursive ? "true" : "false");
    kv.set("train.hidden", std::to_string(train.hidden));
    kv.set("train.epochs", std::to_string(train.epochs));
    kv.set("train.learning_rate", real(train.learning_rate));
    kv.set("train.beta1", real(train.beta1));
    kv.set("train.beta2", real(train.beta2));
    kv.set("train.epsilon", real(train.epsilon));
    kv.set("train.batch_size", std::to_string(train.batch_size));
    kv.set("train.clip_norm", real(train.clip_norm));
    kv.set("impute.n_trees", std::to_string(impute.forest.n_trees));
    kv.set("impute.mtry", std::to_string(impute.forest.tree.mtry));
    kv.set("impute.min_samples_leaf", std::to_string(impute.forest.tree.min_samples_leaf));
    kv.set("impute.max_depth", std::to_string(impute.forest.tree.max_depth));
    kv.set("impute.max_iter", std::to_string(impute.max_iter));
    if (input.empty()) {
      const auto& s = synth;
      kv.set("synth.seed", std::to_string(s.seed));
      kv.set("synth.months", std::to_string(s.months));
      kv.set("synth.start_year", std::to_string(s.start.year));
      kv.set("synth.start_month", std::to_string(s.start.month));
      std::string provinces;
      for (const auto& p : s.provinces) provinces += (provinces.empty() ? "" : ";") + p;
      kv.set("synth.provinces", provinces);
      kv.set("synth.temp_base", real(s.temp_base));
      kv.set("synth.temp_amplitude", real(s.temp_amplitude));
      kv.set("synth.rain_base", real(s.rain_base));
      kv.set("synth.rain_amplitude", real(s.rain_amplitude));
      kv.set("synth.humidity_base", real(s.humidity_base));
      kv.set("synth.humidity_amplitude", real(s.humidity_amplitude));
      kv.set("synth.phase_jitter", real(s.phase_jitter));
      kv.set("synth.climate_noise", real(s.climate_noise));
      kv.set("synth.case_noise", real(s.case_noise));
      kv.set("synth.baseline_incidence", real(s.baseline_incidence));
      kv.set("synth.lag_rain", real(s.lag_rain));
      kv.set("synth.lag_humidity", real(s.lag_humidity));
      kv.set("synth.lag_temp", real(s.lag_temp));
      kv.set("synth.population_min", std::to_string(s.population_min));
      kv.set("synth.population_max", std::to_string(s.population_max));
      kv.set("synth.population_growth", real(s.population_growth));
      kv.set("synth.missingness", real(s.missingness));
    }
    return kv;
  }
};

}  // namespace malcast
