#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kickshift/errors.hpp"
#include "kickshift/pulse.hpp"

namespace kickshift {

/// Physical kind of a configuration value; fixes which unit suffixes are accepted.
enum class Kind { length, time, frequency, field, intensity, angle, real, integer, text, flag };

inline std::string_view to_string(Kind k) {
  switch (k) {
    case Kind::length: return "length";
    case Kind::time: return "time";
    case Kind::frequency: return "frequency";
    case Kind::field: return "field";
    case Kind::intensity: return "intensity";
    case Kind::angle: return "angle";
    case Kind::real: return "real";
    case Kind::integer: return "integer";
    case Kind::text: return "text";
    case Kind::flag: return "flag";
  }
  return "text";
}

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  return out;
}

inline double parse_number(std::string_view s, std::string_view key) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto r = std::from_chars(t.data(), end, v);
  if (t.empty() || r.ec != std::errc{} || r.ptr != end)
    throw ConfigError("'" + std::string(key) + "': cannot parse number from '" + t + "'");
  return v;
}

/// Multiplier from a unit suffix to atomic units, or throws.
inline double unit_factor(Kind k, std::string_view unit, std::string_view key) {
  auto bad = [&] {
    return ConfigError("'" + std::string(key) + "': unit '" + std::string(unit) + "' is not valid for a " +
                       std::string(to_string(k)));
  };
  switch (k) {
    case Kind::length:
    case Kind::frequency:
    case Kind::field:
      if (unit == "au") return 1.0;
      throw bad();
    case Kind::time:
      if (unit == "au") return 1.0;
      if (unit == "fs") return 1000.0 / au_time_as;
      if (unit == "as") return 1.0 / au_time_as;
      throw bad();
    case Kind::intensity:
      if (unit == "wpcm2") return 1.0;
      throw bad();
    case Kind::angle:
      if (unit == "rad") return 1.0;
      throw bad();
    default:
      throw bad();
  }
}

inline bool needs_unit(Kind k) {
  return k != Kind::real && k != Kind::integer && k != Kind::text && k != Kind::flag;
}

}  // namespace detail

struct KeySpec {
  Kind kind = Kind::text;
  std::string default_value;
  std::string help;
  bool list = false;
};

/// Allowed keys ("section.key") of a pipeline.
using Schema = std::map<std::string, KeySpec>;

/// Resolved configuration: raw text per key, checked against a schema; all
/// physical values come back in atomic units.
class Config {
public:
  explicit Config(Schema schema) : schema_(std::move(schema)) {
    for (const auto& [k, spec] : schema_) set(k, spec.default_value);
  }

  const Schema& schema() const { return schema_; }

  /// key = "section.name"
  void set(const std::string& key, const std::string& value) {
    const auto it = schema_.find(key);
    if (it == schema_.end()) throw ConfigError("unknown configuration key '" + key + "'");
    const std::string v = detail::trim(value);
    check(key, it->second, v);
    raw_[key] = v;
  }

  /// "section.key=value"
  void apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' lacks '='");
    set(detail::trim(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)));
  }

  /// Sectioned key-value text: "[section]" headers, "key = value" lines, '#' or ';' comments.
  void parse(std::string_view text, std::string_view origin = "<config>") {
    std::string section;
    std::size_t line_no = 0;
    for (const auto& raw_line : detail::split(text, '\n')) {
      ++line_no;
      std::string line = raw_line;
      if (const auto c = line.find_first_of("#;"); c != std::string::npos) line.resize(c);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": bad section");
        section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected key = value");
      const std::string key = detail::trim(std::string_view(line).substr(0, eq));
      const std::string full = section.empty() ? key : section + "." + key;
      try {
        set(full, line.substr(eq + 1));
      } catch (const ConfigError& e) {
        throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }

  void parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    parse(ss.str(), path);
  }

  const std::string& raw(const std::string& key) const {
    const auto it = raw_.find(key);
    if (it == raw_.end()) throw ConfigError("unknown configuration key '" + key + "'");
    return it->second;
  }

  bool has_value(const std::string& key) const { return !raw(key).empty(); }

  /// Physical quantity in atomic units (W/cm^2 for intensities).
  double quantity(const std::string& key) const {
    const auto& spec = schema_.at(key);
    return parse_scalar(key, spec.kind, raw(key));
  }

  std::vector<double> quantities(const std::string& key) const {
    const auto& spec = schema_.at(key);
    return parse_list(key, spec.kind, raw(key));
  }

  long long integer(const std::string& key) const {
    const double v = detail::parse_number(raw(key), key);
    return static_cast<long long>(v);
  }

  bool flag(const std::string& key) const {
    const auto& v = raw(key);
    return v == "true" || v == "1" || v == "yes" || v == "on";
  }

  std::string text(const std::string& key) const { return raw(key); }

  /// Keys in schema order with their resolved text.
  const std::map<std::string, std::string>& values() const { return raw_; }

  /// Canonical "key = value" dump, one per line.
  std::string dump() const {
    std::string out, section;
    for (const auto& [k, v] : raw_) {
      const auto dot = k.find('.');
      const std::string s = k.substr(0, dot);
      if (s != section) {
        out += (out.empty() ? "[" : "\n[") + s + "]\n";
        section = s;
      }
      out += k.substr(dot + 1) + " = " + v + "\n";
    }
    return out;
  }

private:
  static double parse_scalar(std::string_view key, Kind kind, std::string_view text) {
    std::string t = detail::trim(text);
    if (t.empty()) throw ConfigError("'" + std::string(key) + "' has no value");
    double factor = 1.0;
    if (detail::needs_unit(kind)) {
      const auto sp = t.find_last_of(" \t");
      if (sp == std::string::npos)
        throw ConfigError("'" + std::string(key) + "': missing unit suffix (" + std::string(to_string(kind)) + ")");
      factor = detail::unit_factor(kind, detail::trim(std::string_view(t).substr(sp + 1)), key);
      t = detail::trim(std::string_view(t).substr(0, sp));
    }
    return element(key, t) * factor;
  }

  static std::vector<double> parse_list(std::string_view key, Kind kind, std::string_view text) {
    std::string t = detail::trim(text);
    if (t.empty()) return {};
    double factor = 1.0;
    if (detail::needs_unit(kind)) {
      const auto sp = t.find_last_of(" \t");
      if (sp == std::string::npos)
        throw ConfigError("'" + std::string(key) + "': missing unit suffix (" + std::string(to_string(kind)) + ")");
      factor = detail::unit_factor(kind, detail::trim(std::string_view(t).substr(sp + 1)), key);
      t = detail::trim(std::string_view(t).substr(0, sp));
    }
    std::vector<double> out;
    for (const auto& e : detail::split(t, ',')) out.push_back(element(key, e) * factor);
    return out;
  }

  /// "x", "x pi", "pi", "x/y pi"
  static double element(std::string_view key, std::string_view s) {
    std::string t = detail::trim(s);
    double mult = 1.0;
    if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
      mult = std::numbers::pi;
      t = detail::trim(std::string_view(t).substr(0, t.size() - 2));
      if (t.empty()) return mult;
    }
    if (const auto slash = t.find('/'); slash != std::string::npos) {
      const double den = detail::parse_number(std::string_view(t).substr(slash + 1), key);
      if (den == 0.0) throw ConfigError("'" + std::string(key) + "': division by zero");
      return detail::parse_number(std::string_view(t).substr(0, slash), key) / den * mult;
    }
    return detail::parse_number(t, key) * mult;
  }

  static void check(const std::string& key, const KeySpec& spec, const std::string& v) {
    if (v.empty()) return;
    switch (spec.kind) {
      case Kind::text:
        return;
      case Kind::flag:
        if (v == "true" || v == "false" || v == "1" || v == "0" || v == "yes" || v == "no" || v == "on" || v == "off")
          return;
        throw ConfigError("'" + key + "' expects true/false, got '" + v + "'");
      case Kind::integer: {
        const double x = detail::parse_number(v, key);
        if (x != std::floor(x)) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
        return;
      }
      default:
        if (spec.list)
          (void)parse_list(key, spec.kind, v);
        else
          (void)parse_scalar(key, spec.kind, v);
    }
  }

  Schema schema_;
  std::map<std::string, std::string> raw_;
};

}  // namespace kickshift
