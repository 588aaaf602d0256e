#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "malcast/core/text.hpp"
#include "malcast/error.hpp"

namespace malcast {

/// Flat `key = value` text. Blank lines and lines starting with '#' are
/// skipped; keys may carry section prefixes such as `train.hidden`.
class KeyValues {
 public:
  static KeyValues parse(std::istream& in, const std::string& source = "config") {
    KeyValues kv;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      ++row;
      const auto t = text::trim(line);
      if (t.empty() || t.front() == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError(source + " line " + std::to_string(row) + ": expected 'key = value'");
      const auto key = std::string(text::trim(t.substr(0, eq)));
      if (key.empty()) throw ConfigError(source + " line " + std::to_string(row) + ": empty key");
      if (kv.values_.count(key)) throw ConfigError(source + " line " + std::to_string(row) + ": duplicate key '" + key + "'");
      kv.values_[key] = std::string(text::trim(t.substr(eq + 1)));
    }
    return kv;
  }

  static KeyValues parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    return parse(in, path);
  }

  static KeyValues parse_string(const std::string& s) {
    std::istringstream in(s);
    return parse(in);
  }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string get_or(const std::string& key, std::string fallback) const { return get(key).value_or(std::move(fallback)); }

  double real_or(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    auto r = text::parse_real(*v);
    if (!r) throw ConfigError("key '" + key + "': expected a number, got '" + *v + "'");
    return *r;
  }

  std::uint64_t uint_or(const std::string& key, std::uint64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    auto r = text::parse_uint(*v);
    if (!r) throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + *v + "'");
    return *r;
  }

  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  /// Canonical `key = value` rendering, sorted by key.
  std::string to_string() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace malcast
