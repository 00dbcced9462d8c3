// key=value configuration files: '#' comments, blank lines ignored, typed
// getters with line-numbered parse errors.
#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>

namespace irony {

class Config {
 public:
  Config() = default;

  static Config parse(std::istream& in, const std::string& name = "config") {
    Config cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::size_t start = line.find_first_not_of(" \t");
      if (start == std::string::npos || line[start] == '#') continue;
      std::size_t eq = line.find('=', start);
      if (eq == std::string::npos)
        throw std::runtime_error(name + ":" + std::to_string(line_no) +
                                 ": expected key=value, got '" + line + "'");
      std::string key = trim(line.substr(start, eq - start));
      std::string val = trim(line.substr(eq + 1));
      if (key.empty())
        throw std::runtime_error(name + ":" + std::to_string(line_no) + ": empty key");
      cfg.kv_[key] = val;
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse(in, path);
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  long get_int(const std::string& key, long fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      std::size_t pos = 0;
      long v = std::stol(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::logic_error&) {
      throw std::runtime_error("config key '" + key + "': '" + it->second +
                               "' is not an integer");
    }
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      std::size_t pos = 0;
      double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::logic_error&) {
      throw std::runtime_error("config key '" + key + "': '" + it->second + "' is not a number");
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::runtime_error("config key '" + key + "': '" + v + "' is not a boolean");
  }

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;

  static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  }
};

}  // namespace irony
