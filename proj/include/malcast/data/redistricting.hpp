#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "malcast/core/text.hpp"
#include "malcast/data/dataset.hpp"
#include "malcast/error.hpp"

namespace malcast {

/// Old province -> new province assignment.
class RedistrictingMap {
 public:
  RedistrictingMap() = default;
  explicit RedistrictingMap(std::map<std::string, std::string> old_to_new) : map_(std::move(old_to_new)) {
    if (map_.empty()) throw MapError("redistricting map is empty");
  }

  /// The 18 -> 5 grouping of the administrative reform.
  static RedistrictingMap burundi() {
    std::map<std::string, std::string> m;
    auto group = [&](const char* target, std::initializer_list<const char*> members) {
      for (const char* old : members) m[old] = target;
    };
    group("Bujumbura", {"Bujumbura Mairie", "Bujumbura Rural", "Bubanza", "Cibitoke"});
    group("Gitega", {"Gitega", "Mwaro", "Karuzi", "Muramvya"});
    group("Buhumuza", {"Cankuzo", "Muyinga", "Ruyigi"});
    group("Butanyerera", {"Kirundo", "Ngozi", "Kayanza"});
    group("Burunga", {"Bururi", "Makamba", "Rumonge", "Rutana"});
    return RedistrictingMap(std::move(m));
  }

  /// Two-column CSV `old_province,new_province` with that header.
  static RedistrictingMap read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw MapError("redistricting map: empty file");
    const auto header = text::split_csv_line(line);
    if (header.size() != 2 || header[0] != "old_province" || header[1] != "new_province")
      throw MapError("redistricting map: expected header 'old_province,new_province'");
    std::map<std::string, std::string> m;
    std::size_t row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (text::trim(line).empty()) continue;
      const auto f = text::split_csv_line(line);
      if (f.size() != 2 || f[0].empty() || f[1].empty())
        throw MapError("redistricting map row " + std::to_string(row) + ": expected two non-empty fields");
      if (!m.emplace(f[0], f[1]).second)
        throw MapError("redistricting map row " + std::to_string(row) + ": '" + f[0] + "' mapped twice");
    }
    return RedistrictingMap(std::move(m));
  }

  void write_csv(std::ostream& out) const {
    out << "old_province,new_province\n";
    for (const auto& [o, n] : map_) out << o << ',' << n << '\n';
  }

  const std::string& target(const std::string& old_province) const {
    auto it = map_.find(old_province);
    if (it == map_.end()) throw MapError("province '" + old_province + "' is not in the redistricting map");
    return it->second;
  }

  bool contains(const std::string& old_province) const { return map_.count(old_province) != 0; }

  /// new province -> sorted member list
  std::map<std::string, std::vector<std::string>> groups() const {
    std::map<std::string, std::vector<std::string>> g;
    for (const auto& [o, n] : map_) g[n].push_back(o);
    return g;
  }

  const std::map<std::string, std::string>& entries() const noexcept { return map_; }

 private:
  std::map<std::string, std::string> map_;
};

}  // namespace malcast
