#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lmmadj/errors.hpp"

namespace lmmadj::cli {

/// Flat `key = value` configuration with `[section]` headers. Keys before the
/// first header belong to the unnamed section "". `#` starts a comment line.
class ExperimentConfig {
 public:
  using Section = std::map<std::string, std::string>;

  static ExperimentConfig parse(std::string_view text) {
    ExperimentConfig cfg;
    std::string current;
    cfg.sections_[current];
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      const std::string s = trim(line);
      if (s.empty() || s.front() == '#') continue;
      if (s.front() == '[') {
        if (s.back() != ']' || s.size() < 3) {
          throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
        }
        current = trim(s.substr(1, s.size() - 2));
        if (cfg.sections_.count(current) && !cfg.sections_[current].empty()) {
          throw ConfigError("config line " + std::to_string(line_no) + ": duplicate section [" +
                            current + "]");
        }
        cfg.sections_[current];
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
      }
      const std::string key = trim(s.substr(0, eq));
      const std::string value = trim(s.substr(eq + 1));
      if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
      auto& sec = cfg.sections_[current];
      if (sec.count(key)) {
        throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
      }
      sec[key] = value;
    }
    return cfg;
  }

  static ExperimentConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  /// Canonical text: unnamed section first, then sections and keys in order.
  [[nodiscard]] std::string serialize() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& [name, sec] : sections_) {
      if (name.empty() && sec.empty()) continue;
      if (!first) out << '\n';
      first = false;
      if (!name.empty()) out << '[' << name << "]\n";
      for (const auto& [k, v] : sec) out << k << " = " << v << '\n';
    }
    return out.str();
  }

  bool operator==(const ExperimentConfig& o) const { return normalized() == o.normalized(); }

  [[nodiscard]] bool has_section(const std::string& name) const { return sections_.count(name) > 0; }
  [[nodiscard]] std::vector<std::string> section_names() const {
    std::vector<std::string> out;
    for (const auto& [name, sec] : sections_) {
      if (!name.empty()) out.push_back(name);
    }
    return out;
  }
  [[nodiscard]] const Section& section(const std::string& name) const {
    const auto it = sections_.find(name);
    if (it == sections_.end()) throw ConfigError("config has no section [" + name + "]");
    return it->second;
  }
  void set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
  }

 private:
  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  }

  [[nodiscard]] std::map<std::string, Section> normalized() const {
    std::map<std::string, Section> out;
    for (const auto& [name, sec] : sections_) {
      if (!(name.empty() && sec.empty())) out[name] = sec;
    }
    return out;
  }

  std::map<std::string, Section> sections_;
};

/// Typed view of one section. Every key read is recorded so that leftovers
/// can be reported as unknown.
class SectionReader {
 public:
  SectionReader(const ExperimentConfig::Section& sec, std::string name)
      : sec_(sec), name_(std::move(name)) {}

  [[nodiscard]] bool has(const std::string& key) const { return sec_.count(key) > 0; }

  std::string text(const std::string& key) {
    used_.insert(key);
    const auto it = sec_.find(key);
    if (it == sec_.end()) throw ConfigError(where(key) + ": missing required key");
    return it->second;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    return has(key) ? text(key) : (used_.insert(key), fallback);
  }

  double number(const std::string& key) { return to_number(key, text(key)); }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : (used_.insert(key), fallback);
  }

  std::size_t count(const std::string& key) { return to_count(key, text(key)); }
  std::size_t count(const std::string& key, std::size_t fallback) {
    return has(key) ? count(key) : (used_.insert(key), fallback);
  }

  std::vector<std::string> list(const std::string& key) { return split(text(key)); }
  std::vector<std::string> list(const std::string& key, const std::vector<std::string>& fallback) {
    return has(key) ? list(key) : (used_.insert(key), fallback);
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    for (const auto& item : list(key)) out.push_back(to_number(key, item));
    if (out.empty()) throw ConfigError(where(key) + ": empty list");
    return out;
  }

  /// Strictly increasing list of positive integers.
  std::vector<std::size_t> increasing_counts(const std::string& key) {
    std::vector<std::size_t> out;
    for (const auto& item : list(key)) out.push_back(to_count(key, item));
    if (out.empty()) throw ConfigError(where(key) + ": empty list");
    for (std::size_t i = 1; i < out.size(); ++i) {
      if (out[i] <= out[i - 1]) throw ConfigError(where(key) + ": list must be strictly increasing");
    }
    return out;
  }

  /// Throws for keys that were never read.
  void finish() const {
    for (const auto& [k, v] : sec_) {
      if (!used_.count(k)) throw ConfigError(where(k) + ": unknown key");
    }
  }

  [[nodiscard]] std::string where(const std::string& key) const {
    return "[" + name_ + "] " + key;
  }

 private:
  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
      const auto b = cur.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      const auto e = cur.find_last_not_of(" \t");
      out.push_back(cur.substr(b, e - b + 1));
    }
    return out;
  }

  double to_number(const std::string& key, const std::string& s) const {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ConfigError(where(key) + ": '" + s + "' is not a number");
    }
    return v;
  }

  std::size_t to_count(const std::string& key, const std::string& s) const {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v == 0) {
      throw ConfigError(where(key) + ": '" + s + "' is not a positive integer");
    }
    return v;
  }

  const ExperimentConfig::Section& sec_;
  std::string name_;
  std::set<std::string> used_;
};

}  // namespace lmmadj::cli
