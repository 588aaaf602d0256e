#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "malcast/core/text.hpp"
#include "malcast/data/dataset.hpp"
#include "malcast/error.hpp"
#include "malcast/eval/metrics.hpp"

namespace malcast {

enum class ModelVariant { Univariate, Multivariate, Baseline };

inline std::string_view to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::Univariate: return "univariate";
    case ModelVariant::Multivariate: return "multivariate";
    case ModelVariant::Baseline: return "baseline";
  }
  return "?";
}

inline ModelVariant parse_model_variant(std::string_view s) {
  if (s == "univariate") return ModelVariant::Univariate;
  if (s == "multivariate") return ModelVariant::Multivariate;
  if (s == "baseline") return ModelVariant::Baseline;
  throw ArgumentError("unknown model variant '" + std::string(s) + "'");
}

inline ModelVariant to_model_variant(Variant v) {
  return v == Variant::Univariate ? ModelVariant::Univariate : ModelVariant::Multivariate;
}

/// Observed vs predicted cases for one region over the test horizon.
struct ForecastReport {
  std::string region;
  ModelVariant variant = ModelVariant::Univariate;
  std::vector<MonthKey> months;
  Vector observed;
  Vector predicted;
  double rmse = 0.0;
  double observed_total = 0.0;
  double predicted_total = 0.0;

  static ForecastReport make(std::string region, ModelVariant variant, std::vector<MonthKey> months, Vector observed,
                             Vector predicted) {
    if (months.size() != observed.size() || observed.size() != predicted.size())
      throw ArgumentError("forecast report for '" + region + "': series lengths differ");
    if (months.empty()) throw ArgumentError("forecast report for '" + region + "': empty horizon");
    ForecastReport r;
    r.region = std::move(region);
    r.variant = variant;
    r.months = std::move(months);
    r.observed = std::move(observed);
    r.predicted = std::move(predicted);
    r.rmse = malcast::rmse(r.observed, r.predicted);
    r.observed_total = sum(r.observed);
    r.predicted_total = sum(r.predicted);
    return r;
  }
};

/// (observed_total, predicted_total) over the report horizon.
inline std::pair<double, double> horizon_totals(const ForecastReport& r) {
  return {sum(r.observed), sum(r.predicted)};
}

/// Row label used in tables: provinces by name, the national series as
/// "Country level: Burundi".
inline std::string region_label(std::string_view region) {
  if (region == kCountryName) return "Country level: " + std::string(kCountryName);
  return std::string(region);
}

/// Regions in report order: the five provinces, then the country.
inline std::vector<std::string> report_regions() {
  std::vector<std::string> out(kNewProvinces.begin(), kNewProvinces.end());
  out.emplace_back(kCountryName);
  return out;
}

struct ComparisonRow {
  std::string region;
  double univariate_rmse = 0.0;
  double multivariate_rmse = 0.0;
  double observed_total = 0.0;
  double univariate_total = 0.0;
  double multivariate_total = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
};

/// One univariate and one multivariate report per region, arranged in
/// report order. Baseline reports are ignored.
inline ComparisonTable build_comparison(const std::vector<ForecastReport>& reports) {
  std::map<std::pair<std::string, ModelVariant>, const ForecastReport*> index;
  for (const auto& r : reports) {
    if (r.variant == ModelVariant::Baseline) continue;
    if (!index.emplace(std::pair{r.region, r.variant}, &r).second)
      throw CompletenessError("duplicate " + std::string(to_string(r.variant)) + " report for '" + r.region + "'");
  }
  ComparisonTable table;
  std::vector<std::string> missing;
  for (const auto& region : report_regions()) {
    auto uni = index.find({region, ModelVariant::Univariate});
    auto multi = index.find({region, ModelVariant::Multivariate});
    if (uni == index.end()) missing.push_back(region + " univariate");
    if (multi == index.end()) missing.push_back(region + " multivariate");
    if (uni == index.end() || multi == index.end()) continue;
    table.rows.push_back({region, uni->second->rmse, multi->second->rmse, uni->second->observed_total,
                          uni->second->predicted_total, multi->second->predicted_total});
  }
  if (!missing.empty()) {
    std::string msg = "missing forecast reports:";
    for (const auto& m : missing) msg += " [" + m + "]";
    throw CompletenessError(msg);
  }
  return table;
}

/// Aligned plain-text table: Province / Univariate LSTM / Multivariate LSTM,
/// provinces then a rule then the country row.
inline std::string render_table_text(const ComparisonTable& t) {
  constexpr int w0 = 24, w1 = 17, w2 = 19;
  std::ostringstream os;
  char buf[160];
  auto rule = [&] { os << std::string(w0, '-') << "+" << std::string(w1, '-') << "+" << std::string(w2 - 1, '-') << "\n"; };
  os << "RMSE of malaria cases between Univariate LSTM and Multivariate LSTM\n";
  rule();
  std::snprintf(buf, sizeof buf, "%-*s|%*s |%*s\n", w0, "Province", w1 - 1, "Univariate LSTM", w2 - 1,
                "Multivariate LSTM");
  os << buf;
  rule();
  for (const auto& row : t.rows) {
    if (row.region == kCountryName) rule();
    std::snprintf(buf, sizeof buf, "%-*s|%*s |%*s\n", w0, region_label(row.region).c_str(), w1 - 1,
                  text::format_fixed2(row.univariate_rmse).c_str(), w2 - 1,
                  text::format_fixed2(row.multivariate_rmse).c_str());
    os << buf;
  }
  rule();
  return os.str();
}

inline std::string render_table_csv(const ComparisonTable& t) {
  std::ostringstream os;
  os << "region,univariate_rmse,multivariate_rmse\n";
  for (const auto& row : t.rows)
    os << region_label(row.region) << ',' << text::format_fixed2(row.univariate_rmse) << ','
       << text::format_fixed2(row.multivariate_rmse) << '\n';
  return os.str();
}

inline std::string signed_fixed2(double v) { return (v >= 0.0 ? "+" : "") + text::format_fixed2(v); }

/// One line per region: observed horizon total and each model's predicted
/// total with its difference from observed.
inline std::string render_totals(const ComparisonTable& t) {
  std::ostringstream os;
  for (const auto& row : t.rows) {
    os << region_label(row.region) << ": observed " << text::format_fixed2(row.observed_total) << "; univariate "
       << text::format_fixed2(row.univariate_total) << " ("
       << signed_fixed2(row.univariate_total - row.observed_total) << "); multivariate "
       << text::format_fixed2(row.multivariate_total) << " ("
       << signed_fixed2(row.multivariate_total - row.observed_total) << ")\n";
  }
  return os.str();
}

// ---- forecast and curve files ---------------------------------------------

/// `region,variant,month,observed,predicted`, one row per horizon month.
inline std::string forecast_to_csv(const ForecastReport& r) {
  std::ostringstream os;
  os << "region,variant,month,observed,predicted\n";
  for (std::size_t i = 0; i < r.months.size(); ++i)
    os << r.region << ',' << to_string(r.variant) << ',' << r.months[i].str() << ','
       << text::format_real(r.observed[i]) << ',' << text::format_real(r.predicted[i]) << '\n';
  return os.str();
}

inline std::vector<ForecastReport> read_forecast_csv(std::istream& in, const std::string& source = "forecast") {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "region,variant,month,observed,predicted")
    throw DataError(source + ": expected header 'region,variant,month,observed,predicted'");
  struct Acc {
    std::vector<MonthKey> months;
    Vector obs, pred;
  };
  std::map<std::pair<std::string, std::string>, Acc> groups;
  std::vector<std::pair<std::string, std::string>> order;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    const auto f = text::split_csv_line(line);
    const auto where = source + " row " + std::to_string(row) + ": ";
    if (f.size() != 5) throw DataError(where + "expected 5 fields");
    const auto obs = text::parse_real(f[3]);
    const auto pred = text::parse_real(f[4]);
    if (!obs || !pred) throw DataError(where + "malformed number");
    MonthKey m;
    try {
      m = MonthKey::parse(f[2]);
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    const std::pair key{f[0], f[1]};
    if (!groups.count(key)) order.push_back(key);
    auto& g = groups[key];
    g.months.push_back(m);
    g.obs.push_back(*obs);
    g.pred.push_back(*pred);
  }
  std::vector<ForecastReport> out;
  for (const auto& key : order) {
    auto& g = groups[key];
    out.push_back(ForecastReport::make(key.first, parse_model_variant(key.second), std::move(g.months),
                                       std::move(g.obs), std::move(g.pred)));
  }
  return out;
}

/// Plot data `month,observed,predicted`.
inline std::string curve_to_csv(const ForecastReport& r) {
  std::ostringstream os;
  os << "month,observed,predicted\n";
  for (std::size_t i = 0; i < r.months.size(); ++i)
    os << r.months[i].str() << ',' << text::format_real(r.observed[i]) << ',' << text::format_real(r.predicted[i])
       << '\n';
  return os.str();
}

struct CurveData {
  std::vector<MonthKey> months;
  Vector observed;
  Vector predicted;
};

inline CurveData read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "month,observed,predicted")
    throw DataError("curve file: expected header 'month,observed,predicted'");
  CurveData c;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    const auto f = text::split_csv_line(line);
    const auto o = f.size() == 3 ? text::parse_real(f[1]) : std::nullopt;
    const auto p = f.size() == 3 ? text::parse_real(f[2]) : std::nullopt;
    if (!o || !p) throw DataError("curve file row " + std::to_string(row) + ": malformed");
    c.months.push_back(MonthKey::parse(f[0]));
    c.observed.push_back(*o);
    c.predicted.push_back(*p);
  }
  return c;
}

/// Static SVG with the observed and predicted curves as two polylines.
inline std::string curve_to_svg(const ForecastReport& r) {
  constexpr double W = 720, H = 360, left = 70, right = 20, top = 40, bottom = 50;
  double lo = 0.0, hi = 1.0;
  if (!r.observed.empty()) {
    lo = std::min(*std::min_element(r.observed.begin(), r.observed.end()),
                  *std::min_element(r.predicted.begin(), r.predicted.end()));
    hi = std::max(*std::max_element(r.observed.begin(), r.observed.end()),
                  *std::max_element(r.predicted.begin(), r.predicted.end()));
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const std::size_t n = r.months.size();
  auto px = [&](std::size_t i) { return left + (n > 1 ? (W - left - right) * i / (n - 1.0) : 0.0); };
  auto py = [&](double v) { return top + (H - top - bottom) * (1.0 - (v - lo) / (hi - lo)); };
  auto points = [&](const Vector& v) {
    std::string s;
    char buf[64];
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", px(i), py(v[i]));
      s += buf;
    }
    return s;
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << region_label(r.region) << " (" << to_string(r.variant) << ")</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << left - 6 << "\" y=\"" << top + 4
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << text::format_fixed2(hi)
     << "</text>\n";
  os << "<text x=\"" << left - 6 << "\" y=\"" << H - bottom
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << text::format_fixed2(lo)
     << "</text>\n";
  if (n > 0) {
    os << "<text x=\"" << left << "\" y=\"" << H - bottom + 18 << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << r.months.front().str() << "</text>\n";
    os << "<text x=\"" << W - right << "\" y=\"" << H - bottom + 18
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << r.months.back().str()
       << "</text>\n";
  }
  os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" << points(r.observed) << "\"/>\n";
  os << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6 3\" points=\""
     << points(r.predicted) << "\"/>\n";
  os << "<text x=\"" << left + 10 << "\" y=\"" << H - 12
     << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#1f77b4\">observed</text>\n";
  os << "<text x=\"" << left + 90 << "\" y=\"" << H - 12
     << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\">predicted</text>\n";
  os << "</svg>\n";
  return os.str();
}

/// Lower-case file-name form of a region name, spaces as underscores.
inline std::string region_slug(std::string_view region) {
  std::string slug;
  for (char c : region) slug += (c == ' ') ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return slug;
}

/// File-name stem for a region/variant pair, e.g. "curve_bujumbura_univariate".
inline std::string curve_stem(const std::string& region, ModelVariant v) {
  return "curve_" + region_slug(region) + "_" + std::string(to_string(v));
}

}  // namespace malcast
