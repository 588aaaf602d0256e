// malcast: batch front end for the synth -> impute -> aggregate -> train ->
// forecast -> evaluate chain. Each subcommand writes its files atomically into
// --out (default $MALCAST_OUT_DIR, else ./malcast_out).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "malcast/malcast.hpp"

namespace {

using namespace malcast;

int exit_code_for(const std::string& category) {
  static const std::map<std::string, int> codes = {
      {"argument", 2}, {"config", 2},        {"usage", 2},      {"io", 3},
      {"data", 4},     {"shape", 4},         {"map", 4},        {"coverage", 4},
      {"precondition", 4}, {"completeness", 5}, {"divergence", 6}, {"contract", 7}};
  auto it = codes.find(category);
  return it == codes.end() ? 1 : it->second;
}

int fail(const std::string& category, const std::string& message) {
  std::string flat = message;
  for (char& c : flat)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << "error: " << category << ": " << flat << "\n";
  return exit_code_for(category);
}

/// Binds `--<key>` for every key in `keys`; values land in `store`.
void add_key_flags(CLI::App* app, const std::vector<std::string>& keys, std::map<std::string, std::string>& store) {
  for (const auto& k : keys) app->add_option("--" + k, store[k], "config key " + k);
}

/// Config file (if any) overlaid with the flags the user actually passed.
KeyValues collect_keys(CLI::App* app, const std::string& config_path, const std::vector<std::string>& keys,
                       const std::map<std::string, std::string>& store) {
  KeyValues kv = config_path.empty() ? KeyValues{} : KeyValues::parse_file(config_path);
  for (const auto& k : keys)
    if (app->count("--" + k) > 0) kv.set(k, store.at(k));
  return kv;
}

std::vector<std::string> keys_with_prefix(const std::string& prefix) {
  std::vector<std::string> out;
  for (const auto& k : PipelineConfig::known_keys())
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

void log_effective(const KeyValues& kv) {
  for (const auto& [k, v] : kv.entries()) std::cerr << "config: " << k << " = " << v << "\n";
}

void emit(const OutputSet& out, const std::string& dir) {
  for (const auto& line : out.log) std::cerr << line << "\n";
  out.commit(dir);
  std::cerr << "wrote " << out.files.size() << " file(s) to " << dir << "\n";
}

Dataset load(const std::string& path) { return ingest_csv_file(path); }

RedistrictingMap load_map(const std::string& path) {
  if (path.empty()) return RedistrictingMap::burundi();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open map '" + path + "'");
  return RedistrictingMap::read_csv(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Province-level malaria case forecasting with LSTM networks"};
  app.require_subcommand(1);
  std::string out_dir = default_out_dir();
  app.add_option("--out", out_dir, "output directory (default $" + std::string(kOutDirEnv) + ")");

  // synth
  auto* synth = app.add_subcommand("synth", "generate seeded synthetic province data (truth + masked)");
  std::string synth_config;
  std::map<std::string, std::string> synth_store;
  const auto synth_keys = keys_with_prefix("synth.");
  synth->add_option("--config", synth_config, "key-value file with synth.* keys");
  add_key_flags(synth, synth_keys, synth_store);

  // impute
  auto* impute = app.add_subcommand("impute", "fill missing climate cells with missForest");
  std::string impute_input;
  std::uint64_t impute_seed_value = 1;
  std::map<std::string, std::string> impute_store;
  const auto impute_keys = keys_with_prefix("impute.");
  impute->add_option("--input", impute_input, "monthly CSV")->required();
  impute->add_option("--seed", impute_seed_value, "global seed");
  add_key_flags(impute, impute_keys, impute_store);

  // aggregate
  auto* aggregate = app.add_subcommand("aggregate", "aggregate to the new provinces or the country");
  std::string aggregate_input, aggregate_map, aggregate_level;
  aggregate->add_option("--input", aggregate_input, "monthly CSV")->required();
  aggregate->add_option("--map", aggregate_map, "old_province,new_province CSV (default built-in)");
  aggregate->add_option("--level", aggregate_level, "new | country")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train one region model");
  std::string train_input, train_region_name, train_variant;
  std::uint64_t train_seed_value = 1;
  std::map<std::string, std::string> train_store;
  auto train_keys = keys_with_prefix("train.");
  train_keys.push_back("window.lookback");
  train_keys.push_back("window.train_fraction");
  train_cmd->add_option("--input", train_input, "monthly CSV")->required();
  train_cmd->add_option("--region", train_region_name, "province or Burundi")->required();
  train_cmd->add_option("--variant", train_variant, "univariate | multivariate")->required();
  train_cmd->add_option("--seed", train_seed_value, "global seed");
  add_key_flags(train_cmd, train_keys, train_store);

  // forecast
  auto* forecast = app.add_subcommand("forecast", "forecast the test horizon of a trained model");
  std::string forecast_model, forecast_input;
  bool forecast_recursive = false;
  forecast->add_option("--model", forecast_model, "model file")->required();
  forecast->add_option("--input", forecast_input, "monthly CSV containing the model's region")->required();
  forecast->add_flag("--recursive", forecast_recursive, "feed forecasts back instead of observed cases");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "build the RMSE table, totals and curves");
  std::vector<std::string> evaluate_files;
  evaluate->add_option("forecasts", evaluate_files, "forecast CSV files")->required();

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "run the whole chain from one config file");
  std::string pipeline_config;
  std::map<std::string, std::string> pipeline_store;
  const auto& all_keys = PipelineConfig::known_keys();
  pipeline->add_option("--config", pipeline_config, "key-value config file");
  add_key_flags(pipeline, all_keys, pipeline_store);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*synth) {
      auto kv = collect_keys(synth, synth_config, synth_keys, synth_store);
      KeyValues stripped;
      for (const auto& [k, v] : kv.entries()) {
        if (k.rfind("synth.", 0) != 0) throw ConfigError("unknown synth key '" + k + "'");
        stripped.set(k, v);
      }
      const auto cfg = SynthConfig::from_keys(stripped, "synth.");
      std::cerr << "seed: " << cfg.seed << "\n";
      log_effective(stripped);
      emit(cmd_synth(cfg), out_dir);
    } else if (*impute) {
      const auto kv = collect_keys(impute, "", impute_keys, impute_store);
      KeyValues full = kv;
      full.set("seed", std::to_string(impute_seed_value));
      const auto cfg = PipelineConfig::from_keys(full);
      std::cerr << "seed: " << impute_seed_value << "\n";
      log_effective(full);
      emit(cmd_impute(load(impute_input), cfg.impute, impute_seed_value), out_dir);
    } else if (*aggregate) {
      Scheme level;
      if (aggregate_level == "new") level = Scheme::New;
      else if (aggregate_level == "country") level = Scheme::Country;
      else throw ArgumentError("--level must be 'new' or 'country', got '" + aggregate_level + "'");
      std::cerr << "seed: none (deterministic stage)\n";
      emit(cmd_aggregate(load(aggregate_input), load_map(aggregate_map), level), out_dir);
    } else if (*train_cmd) {
      KeyValues full = collect_keys(train_cmd, "", train_keys, train_store);
      full.set("seed", std::to_string(train_seed_value));
      const auto cfg = PipelineConfig::from_keys(full);
      TrainRequest req{train_region_name, parse_variant(train_variant), cfg.lookback, cfg.train_fraction,
                       cfg.train, train_seed_value};
      std::cerr << "seed: " << train_seed_value << "\n";
      log_effective(full);
      emit(cmd_train(load(train_input), req), out_dir);
    } else if (*forecast) {
      const auto model = read_model_file(forecast_model);
      std::cerr << "seed: " << model.config.seed << " (from model)\n";
      emit(cmd_forecast(model, load(forecast_input), forecast_recursive), out_dir);
    } else if (*evaluate) {
      std::vector<ForecastReport> reports;
      for (const auto& path : evaluate_files) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open forecast '" + path + "'");
        auto parsed = read_forecast_csv(in, path);
        reports.insert(reports.end(), parsed.begin(), parsed.end());
      }
      std::cerr << "seed: none (deterministic stage)\n";
      emit(cmd_evaluate(reports), out_dir);
    } else if (*pipeline) {
      auto kv = collect_keys(pipeline, pipeline_config, all_keys, pipeline_store);
      if (!app.count("--out") && !kv.has("out_dir")) kv.set("out_dir", out_dir);
      const auto cfg = PipelineConfig::from_keys(kv);
      std::cerr << "seed: " << cfg.seed << "\n";
      log_effective(cfg.effective());
      emit(cmd_pipeline(cfg), app.count("--out") ? out_dir : cfg.out_dir);
    }
  } catch (const Error& e) {
    return fail(e.category(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
