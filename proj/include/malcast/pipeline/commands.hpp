#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "malcast/data/aggregate.hpp"
#include "malcast/data/csv_io.hpp"
#include "malcast/data/redistricting.hpp"
#include "malcast/eval/metrics.hpp"
#include "malcast/eval/report.hpp"
#include "malcast/impute/missforest.hpp"
#include "malcast/lstm/model_io.hpp"
#include "malcast/lstm/trainer.hpp"
#include "malcast/pipeline/config.hpp"
#include "malcast/synth/synthgen.hpp"
#include "malcast/window/windowing.hpp"

namespace malcast {

/// Files produced by a command, keyed by path relative to the output
/// directory, plus log lines for stderr. Nothing touches the disk until
/// `commit`.
struct OutputSet {
  std::map<std::string, std::string> files;
  std::vector<std::string> log;

  void add(const std::string& relative_path, std::string content) { files[relative_path] = std::move(content); }

  void merge(const std::string& subdir, const OutputSet& other) {
    for (const auto& [path, content] : other.files) files[subdir.empty() ? path : subdir + "/" + path] = content;
    log.insert(log.end(), other.log.begin(), other.log.end());
  }

  /// Writes every file to a temporary sibling first and renames only after
  /// all writes succeeded; on failure the temporaries are removed.
  void commit(const std::filesystem::path& dir) const {
    namespace fs = std::filesystem;
    std::vector<std::pair<fs::path, fs::path>> staged;
    auto cleanup = [&] {
      std::error_code ec;
      for (const auto& [tmp, final_path] : staged) fs::remove(tmp, ec);
    };
    try {
      for (const auto& [rel, content] : files) {
        const fs::path final_path = dir / rel;
        std::error_code ec;
        fs::create_directories(final_path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + final_path.parent_path().string() + "': " + ec.message());
        fs::path tmp = final_path;
        tmp += ".tmp";
        staged.emplace_back(tmp, final_path);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        out.close();
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
      }
      for (const auto& [tmp, final_path] : staged) {
        std::error_code ec;
        fs::rename(tmp, final_path, ec);
        if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + final_path.string() + "': " + ec.message());
      }
    } catch (...) {
      cleanup();
      throw;
    }
  }
};

/// "bujumbura_mairie_univariate" style stem shared by model and forecast files.
inline std::string model_stem(const std::string& region, Variant v) {
  return region_slug(region) + "_" + std::string(to_string(v));
}

inline OutputSet cmd_synth(const SynthConfig& cfg) {
  const auto result = generate(cfg);
  OutputSet out;
  out.add("truth.csv", to_csv_string(result.truth));
  out.add("masked.csv", to_csv_string(result.masked));
  out.log.push_back("synth: seed " + std::to_string(cfg.seed) + ", " + std::to_string(cfg.provinces.size()) +
                    " provinces x " + std::to_string(cfg.months) + " months, " +
                    std::to_string(result.masked.missing_climate_count()) + " climate cells masked");
  return out;
}

inline OutputSet cmd_impute(const Dataset& d, const MissForestParams& params, std::uint64_t global_seed) {
  std::vector<ProvinceImputationLog> log;
  const auto completed = impute_dataset(d, params, impute_seed(global_seed), &log);
  OutputSet out;
  out.add("imputed.csv", to_csv_string(completed));
  std::ostringstream os;
  os << "province,missing,iterations,final_delta\n";
  for (const auto& l : log)
    os << l.province << ',' << l.missing << ',' << l.iterations_run << ',' << text::format_real(l.final_delta) << '\n';
  out.add("imputation_log.csv", os.str());
  out.log.push_back("impute: seed " + std::to_string(global_seed) + ", " + std::to_string(d.missing_climate_count()) +
                    " cells imputed over " + std::to_string(d.province_count()) + " provinces");
  return out;
}

/// level New: old -> 5 provinces. level Country: old or new -> national series.
inline OutputSet cmd_aggregate(const Dataset& d, const RedistrictingMap& map, Scheme level) {
  OutputSet out;
  if (level == Scheme::Old) throw ArgumentError("aggregate: level must be 'new' or 'country'");
  if (level == Scheme::New) {
    if (d.scheme() != Scheme::Old) throw PreconditionError("aggregate: level 'new' expects an old-scheme dataset");
    out.add("provinces.csv", to_csv_string(aggregate_provinces(d, map)));
  } else {
    const Dataset provinces = d.scheme() == Scheme::Old ? aggregate_provinces(d, map) : d;
    out.add("country.csv", to_csv_string(to_country_level(provinces)));
  }
  out.log.push_back("aggregate: " + std::to_string(d.province_count()) + " provinces -> level " +
                    std::string(to_string(level)));
  return out;
}

struct TrainRequest {
  std::string region;
  Variant variant = Variant::Univariate;
  std::size_t lookback = 12;
  double train_fraction = 0.8;
  TrainConfig train;  // seed is overwritten with the derived stage seed
  std::uint64_t global_seed = 1;
};

inline TrainedModel train_region(const Dataset& d, const TrainRequest& req) {
  const WindowSpec spec{req.lookback, req.variant};
  const auto windows = make_windows(d.series(req.region), spec);
  const auto [train_part, test_part] = split_train_test(windows, req.train_fraction);
  TrainConfig cfg = req.train;
  cfg.seed = train_seed(req.global_seed, req.region, req.variant);
  auto model = train(train_part, cfg);
  model.region = req.region;
  model.train_fraction = req.train_fraction;
  return model;
}

inline OutputSet cmd_train(const Dataset& d, const TrainRequest& req) {
  const auto model = train_region(d, req);
  const auto stem = model_stem(req.region, req.variant);
  OutputSet out;
  out.add(stem + ".model", model_to_string(model));
  std::ostringstream os;
  os << "epoch,loss\n";
  for (std::size_t i = 0; i < model.loss_history.size(); ++i)
    os << i + 1 << ',' << text::format_real(model.loss_history[i]) << '\n';
  out.add(stem + "_loss.csv", os.str());
  out.log.push_back("train: " + req.region + " " + std::string(to_string(req.variant)) + ", seed " +
                    std::to_string(model.config.seed) + ", " + std::to_string(model.config.epochs) + " epochs");
  return out;
}

/// Forecasts the test horizon of the model's region: one step ahead from
/// observed history, or recursively from the end of the training period.
inline ForecastReport forecast_region(const TrainedModel& model, const Dataset& d, bool recursive) {
  const auto& series = d.series(model.region);
  const auto windows = make_windows(series, model.spec);
  auto [train_part, test_part] = split_train_test(windows, model.train_fraction);
  Vector predicted;
  if (recursive) {
    const auto features = series_features(series, model.spec.variant);
    predicted = predict_recursive(model, features, model.spec.lookback + train_part.size(), test_part.size());
  } else {
    predicted = predict(model, test_part);
  }
  return ForecastReport::make(model.region, to_model_variant(model.spec.variant), test_part.target_months,
                              test_part.targets, std::move(predicted));
}

inline OutputSet cmd_forecast(const TrainedModel& model, const Dataset& d, bool recursive) {
  const auto report = forecast_region(model, d, recursive);
  OutputSet out;
  out.add(model_stem(model.region, model.spec.variant) + ".csv", forecast_to_csv(report));
  out.log.push_back("forecast: " + model.region + " " + std::string(to_string(model.spec.variant)) + ", " +
                    std::to_string(report.months.size()) + " months, rmse " + text::format_fixed2(report.rmse));
  return out;
}

inline OutputSet cmd_evaluate(const std::vector<ForecastReport>& reports) {
  const auto table = build_comparison(reports);
  OutputSet out;
  out.add("rmse_table.txt", render_table_text(table));
  out.add("rmse_table.csv", render_table_csv(table));
  out.add("horizon_totals.txt", render_totals(table));
  for (const auto& r : reports) {
    const auto stem = curve_stem(r.region, r.variant);
    out.add("curves/" + stem + ".csv", curve_to_csv(r));
    out.add("curves/" + stem + ".svg", curve_to_svg(r));
  }
  out.log.push_back("evaluate: " + std::to_string(reports.size()) + " forecasts, " +
                    std::to_string(table.rows.size()) + " table rows");
  return out;
}

inline Dataset reparse(const std::string& csv) {
  std::istringstream in(csv);
  return ingest_csv(in);
}

/// The whole chain: (synthesize or ingest) -> impute -> aggregate -> train the
/// univariate and multivariate model for each of the five provinces and the
/// country -> forecast -> evaluate. Every intermediate file is the output of
/// the matching single command run on the previous stage's file.
inline OutputSet cmd_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  OutputSet out;
  out.add("effective_config.txt", cfg.effective().to_string());
  out.log.push_back("pipeline: seed " + std::to_string(cfg.seed) + ", output " + cfg.out_dir);

  std::string raw_csv;
  if (cfg.input.empty()) {
    const auto synth = cmd_synth(cfg.synth);
    out.merge("data", synth);
    raw_csv = synth.files.at("masked.csv");
  } else {
    std::ifstream in(cfg.input, std::ios::binary);
    if (!in) throw IoError("cannot open input '" + cfg.input + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    raw_csv = ss.str();
  }
  const Dataset raw = reparse(raw_csv);
  if (raw.scheme() != Scheme::Old) throw PreconditionError("pipeline input must use the 18 old provinces");

  RedistrictingMap map = RedistrictingMap::burundi();
  if (!cfg.map.empty()) {
    std::ifstream in(cfg.map);
    if (!in) throw IoError("cannot open map '" + cfg.map + "'");
    map = RedistrictingMap::read_csv(in);
  }

  const auto imputed = cmd_impute(raw, cfg.impute, cfg.seed);
  out.merge("data", imputed);
  const Dataset complete = reparse(imputed.files.at("imputed.csv"));

  const auto provinces_out = cmd_aggregate(complete, map, Scheme::New);
  out.merge("data", provinces_out);
  const Dataset provinces = reparse(provinces_out.files.at("provinces.csv"));
  const auto country_out = cmd_aggregate(provinces, map, Scheme::Country);
  out.merge("data", country_out);
  const Dataset country = reparse(country_out.files.at("country.csv"));

  std::vector<ForecastReport> reports;
  for (const auto& region : report_regions()) {
    const Dataset& source = region == kCountryName ? country : provinces;
    for (Variant v : {Variant::Univariate, Variant::Multivariate}) {
      TrainRequest req{region, v, cfg.lookback, cfg.train_fraction, cfg.train, cfg.seed};
      const auto trained = cmd_train(source, req);
      out.merge("models", trained);
      std::istringstream model_text(trained.files.at(model_stem(region, v) + ".model"));
      const auto model = read_model(model_text);
      const auto forecast = cmd_forecast(model, source, cfg.recursive);
      out.merge("forecasts", forecast);
      std::istringstream fc(forecast.files.at(model_stem(region, v) + ".csv"));
      auto parsed = read_forecast_csv(fc);
      reports.insert(reports.end(), parsed.begin(), parsed.end());
    }
  }
  out.merge("report", cmd_evaluate(reports));
  return out;
}

}  // namespace malcast
