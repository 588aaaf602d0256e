#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "malcast/core/text.hpp"
#include "malcast/error.hpp"
#include "malcast/lstm/trainer.hpp"

namespace malcast {

// Line-oriented text format. Every real is written in shortest round-trip
// form, so read(write(m)) == m bit for bit.
//
//   malcast-model 1
//   region <name>
//   variant univariate|multivariate
//   lookback <L>
//   train_fraction <x>
//   <train config keys, one per line>
//   features <F>
//   hidden <H>
//   input_scaler_min <n> v...      (and _max, target_scaler_min/_max)
//   w <rows> <cols> v...           (u likewise; b, head_w as <n> v...)
//   head_b <v>
//   loss_history <n> v...
//   end
inline constexpr std::string_view kModelMagic = "malcast-model";
inline constexpr int kModelVersion = 1;

namespace detail {

inline void write_reals(std::ostream& out, std::span<const double> v) {
  for (double x : v) out << ' ' << text::format_real(x);
}

struct ModelReader {
  std::map<std::string, std::vector<std::string>> fields;
  std::map<std::string, std::string> raw;

  static ModelReader parse(std::istream& in) {
    ModelReader r;
    std::string line;
    if (!std::getline(in, line)) throw DataError("model file is empty");
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != kModelMagic) throw DataError("not a model file (bad magic)");
    if (version != kModelVersion) throw DataError("unsupported model format version " + std::to_string(version));
    bool ended = false;
    while (std::getline(in, line)) {
      if (line == "end") {
        ended = true;
        break;
      }
      const auto sp = line.find(' ');
      const std::string key = line.substr(0, sp);
      const std::string rest = sp == std::string::npos ? "" : line.substr(sp + 1);
      r.raw[key] = rest;
      std::istringstream tok(rest);
      std::vector<std::string> parts;
      for (std::string s; tok >> s;) parts.push_back(s);
      r.fields[key] = std::move(parts);
    }
    if (!ended) throw DataError("model file truncated (no 'end' line)");
    return r;
  }

  const std::vector<std::string>& get(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw DataError("model file: missing field '" + key + "'");
    return it->second;
  }

  double real(const std::string& key) const {
    const auto& f = get(key);
    if (f.size() != 1) throw DataError("model file: field '" + key + "' expects one value");
    return parse(f[0], key);
  }

  std::uint64_t count(const std::string& key) const {
    const auto& f = get(key);
    if (f.size() != 1) throw DataError("model file: field '" + key + "' expects one value");
    auto v = text::parse_uint(f[0]);
    if (!v) throw DataError("model file: bad integer in '" + key + "'");
    return *v;
  }

  Vector vec(const std::string& key) const {
    const auto& f = get(key);
    if (f.empty()) throw DataError("model file: field '" + key + "' is empty");
    auto n = text::parse_int(f[0]);
    if (!n || *n < 0 || static_cast<std::size_t>(*n) + 1 != f.size())
      throw DataError("model file: length mismatch in '" + key + "'");
    Vector out;
    for (std::size_t i = 1; i < f.size(); ++i) out.push_back(parse(f[i], key));
    return out;
  }

  Matrix mat(const std::string& key, std::size_t rows, std::size_t cols) const {
    const auto& f = get(key);
    if (f.size() != rows * cols + 2 || f[0] != std::to_string(rows) || f[1] != std::to_string(cols))
      throw DataError("model file: shape mismatch in '" + key + "'");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = parse(f[i + 2], key);
    return m;
  }

  static double parse(const std::string& s, const std::string& key) {
    if (s == "inf" || s == "-inf" || s == "nan") throw DataError("model file: non-finite value in '" + key + "'");
    auto v = text::parse_real(s);
    if (!v) throw DataError("model file: bad number '" + s + "' in '" + key + "'");
    return *v;
  }
};

}  // namespace detail

inline void write_model(std::ostream& out, const TrainedModel& m) {
  const auto& p = m.params;
  const auto& c = m.config;
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "region " << m.region << '\n';
  out << "variant " << to_string(m.spec.variant) << '\n';
  out << "lookback " << m.spec.lookback << '\n';
  out << "train_fraction " << text::format_real(m.train_fraction) << '\n';
  out << "hidden_size " << c.hidden << '\n';
  out << "epochs " << c.epochs << '\n';
  out << "learning_rate " << text::format_real(c.learning_rate) << '\n';
  out << "beta1 " << text::format_real(c.beta1) << '\n';
  out << "beta2 " << text::format_real(c.beta2) << '\n';
  out << "epsilon " << text::format_real(c.epsilon) << '\n';
  out << "batch_size " << c.batch_size << '\n';
  out << "seed " << c.seed << '\n';
  out << "clip_norm " << text::format_real(c.clip_norm) << '\n';
  out << "features " << p.features << '\n';
  out << "hidden " << p.hidden << '\n';
  auto vec = [&](const char* key, std::span<const double> v) {
    out << key << ' ' << v.size();
    detail::write_reals(out, v);
    out << '\n';
  };
  auto mat = [&](const char* key, const Matrix& x) {
    out << key << ' ' << x.rows() << ' ' << x.cols();
    detail::write_reals(out, x.data());
    out << '\n';
  };
  vec("input_scaler_min", m.input_scaler.min);
  vec("input_scaler_max", m.input_scaler.max);
  vec("target_scaler_min", m.target_scaler.min);
  vec("target_scaler_max", m.target_scaler.max);
  mat("w", p.w);
  mat("u", p.u);
  vec("b", p.b);
  vec("head_w", p.head_w);
  out << "head_b " << text::format_real(p.head_b) << '\n';
  vec("loss_history", m.loss_history);
  out << "end\n";
}

inline TrainedModel read_model(std::istream& in) {
  const auto r = detail::ModelReader::parse(in);
  TrainedModel m;
  auto region = r.raw.find("region");
  if (region == r.raw.end() || region->second.empty()) throw DataError("model file: missing region");
  m.region = region->second;
  m.spec.variant = parse_variant(r.get("variant").at(0));
  m.spec.lookback = r.count("lookback");
  m.train_fraction = r.real("train_fraction");
  m.config.hidden = r.count("hidden_size");
  m.config.epochs = r.count("epochs");
  m.config.learning_rate = r.real("learning_rate");
  m.config.beta1 = r.real("beta1");
  m.config.beta2 = r.real("beta2");
  m.config.epsilon = r.real("epsilon");
  m.config.batch_size = r.count("batch_size");
  m.config.seed = r.count("seed");
  m.config.clip_norm = r.real("clip_norm");
  const auto features = r.count("features");
  const auto hidden = r.count("hidden");
  if (features != m.spec.features()) throw DataError("model file: feature count does not match variant");
  auto& p = m.params;
  p = LstmParams::zeros(features, hidden);
  m.input_scaler.min = r.vec("input_scaler_min");
  m.input_scaler.max = r.vec("input_scaler_max");
  m.target_scaler.min = r.vec("target_scaler_min");
  m.target_scaler.max = r.vec("target_scaler_max");
  if (m.input_scaler.min.size() != features || m.input_scaler.max.size() != features ||
      m.target_scaler.min.size() != 1 || m.target_scaler.max.size() != 1)
    throw DataError("model file: scaler widths do not match");
  p.w = r.mat("w", 4 * hidden, features);
  p.u = r.mat("u", 4 * hidden, hidden);
  p.b = r.vec("b");
  p.head_w = r.vec("head_w");
  if (p.b.size() != 4 * hidden || p.head_w.size() != hidden) throw DataError("model file: bias sizes do not match");
  p.head_b = r.real("head_b");
  m.loss_history = r.vec("loss_history");
  return m;
}

inline std::string model_to_string(const TrainedModel& m) {
  std::ostringstream os;
  write_model(os, m);
  return os.str();
}

inline TrainedModel read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model '" + path + "'");
  try {
    return read_model(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace malcast
