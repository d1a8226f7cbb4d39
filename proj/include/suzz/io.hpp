#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "suzz/core.hpp"
#include "suzz/sampler.hpp"

namespace suzz::io {

/// Shortest text that reads back to the same double (at most 17 digits).
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline nlohmann::json event_json(const Event& e) {
  return {{"t", e.t}, {"x", e.x}, {"theta", e.theta}, {"flip", e.flip}};
}

/// One JSON object per line: {"t", "x", "theta", "flip"}.
inline void write_events_jsonl(std::ostream& os, const EventChain& chain) {
  for (const auto& e : chain.events) os << event_json(e).dump() << '\n';
}

inline std::vector<Event> read_events_jsonl(std::istream& is) {
  std::vector<Event> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Event e;
      e.t = j.at("t").get<double>();
      e.x = j.at("x").get<Vec>();
      e.theta = j.at("theta").get<Velocity>();
      e.flip = j.at("flip").get<int>();
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw error("events line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

/// Header t,x1..xd,theta1..thetad; floats with up to 17 significant digits.
inline void write_skeleton_csv(std::ostream& os, const Skeleton& sk) {
  const std::size_t d = sk.points.empty() ? 0 : sk.points.front().x.size();
  os << 't';
  for (std::size_t i = 1; i <= d; ++i) os << ",x" << i;
  for (std::size_t i = 1; i <= d; ++i) os << ",theta" << i;
  os << '\n';
  for (const auto& p : sk.points) {
    os << format_double(p.t);
    for (double v : p.x) os << ',' << format_double(v);
    for (int v : p.theta) os << ',' << v;
    os << '\n';
  }
}

inline double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw error("cannot parse number '" + s + "' in " + what);
  return v;
}

inline Skeleton read_skeleton_csv(std::istream& is) {
  Skeleton sk;
  std::string line;
  if (!std::getline(is, line)) throw error("skeleton csv: missing header");
  std::size_t cols = 1;
  for (char c : line) cols += c == ',';
  if (cols < 3 || (cols - 1) % 2 != 0) throw error("skeleton csv: malformed header '" + line + "'");
  const std::size_t d = (cols - 1) / 2;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    const std::string where = "skeleton csv line " + std::to_string(lineno);
    if (f.size() != cols) throw error(where + ": expected " + std::to_string(cols) + " fields");
    SkeletonPoint p;
    p.t = parse_double(f[0], where);
    for (std::size_t i = 0; i < d; ++i) p.x.push_back(parse_double(f[1 + i], where));
    for (std::size_t i = 0; i < d; ++i) {
      p.theta.push_back(static_cast<int>(parse_double(f[1 + d + i], where)));
    }
    sk.points.push_back(std::move(p));
  }
  if (sk.points.size() >= 2) sk.delta = sk.points[1].t - sk.points[0].t;
  return sk;
}

// ---------------------------------------------------------------------------
// Config files
//
//   # comment
//   key = value            (global section)
//   [section]
//   key = value            (stored as "section.key")

class Config {
 public:
  static Config parse(std::istream& is, const std::string& source = "config") {
    Config c;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::string where = source + ":" + std::to_string(lineno);
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) throw config_error(where + ": malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw config_error(where + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw config_error(where + ": empty key");
      const std::string full = section.empty() ? key : section + "." + key;
      if (c.values_.count(full)) throw config_error(where + ": duplicate key '" + full + "'");
      c.values_[full] = trim(line.substr(eq + 1));
      c.lines_[full] = where;
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    return parse(in, path);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
    lines_[key] = "command line";
  }

  /// Looks up "section.key" first, then the global "key".
  std::optional<std::string> lookup(const std::string& section, const std::string& key) const {
    if (!section.empty()) {
      auto it = values_.find(section + "." + key);
      if (it != values_.end()) return it->second;
    }
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    return std::nullopt;
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    return lookup(section, key).value_or(fallback);
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    const auto v = lookup(section, key);
    if (!v) return fallback;
    try {
      return parse_double(*v, "field");
    } catch (const error&) {
      throw config_error(where(section, key) + ": field '" + key + "' is not a number: '" + *v + "'");
    }
  }

  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const {
    const auto v = lookup(section, key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
      throw config_error(where(section, key) + ": field '" + key +
                         "' is not a nonnegative integer: '" + *v + "'");
    }
    return out;
  }

  /// Comma-separated list.
  std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                    const std::vector<std::string>& fallback) const {
    const auto v = lookup(section, key);
    if (!v) return fallback;
    std::vector<std::string> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  std::string where(const std::string& section, const std::string& key) const {
    if (!section.empty()) {
      auto it = lines_.find(section + "." + key);
      if (it != lines_.end()) return it->second;
    }
    auto it = lines_.find(key);
    return it == lines_.end() ? "config" : it->second;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> lines_;
};

}  // namespace suzz::io
