#include "homdip/config.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "homdip/errors.hpp"
#include "homdip/io_util.hpp"

namespace homdip {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// strips a trailing comment, honoring double-quoted strings
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool parse_number(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;  // to_chars does not accept a leading '+'
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

ConfigFile::Value parse_value(const std::string& raw, int lineno) {
  const std::string v = trim(raw);
  if (v.empty()) {
    throw ConfigError("config line " + std::to_string(lineno) + ": missing value");
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') {
      throw ConfigError("config line " + std::to_string(lineno) + ": unterminated string");
    }
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[') {
    if (v.back() != ']') {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": arrays must close on the same line");
    }
    std::vector<double> arr;
    std::string body = v.substr(1, v.size() - 2);
    std::istringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (trim(item).empty()) continue;
      double x = 0.0;
      if (!parse_number(item, x)) {
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": bad array element '" + trim(item) + "'");
      }
      arr.push_back(x);
    }
    return arr;
  }
  double x = 0.0;
  if (!parse_number(v, x)) {
    throw ConfigError("config line " + std::to_string(lineno) + ": bad value '" + v + "'");
  }
  return x;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("config line " + std::to_string(lineno) + ": bad table header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    cfg.values_[full] = parse_value(line.substr(eq + 1), lineno);
  }
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  return parse(read_text_file(path));
}

double ConfigFile::number(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError("config: missing required key '" + key + "'");
  }
  if (const double* d = std::get_if<double>(&it->second)) return *d;
  throw ConfigError("config: key '" + key + "' is not a number");
}

double ConfigFile::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

bool ConfigFile::boolean_or(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const bool* b = std::get_if<bool>(&it->second)) return *b;
  throw ConfigError("config: key '" + key + "' is not a boolean");
}

std::string ConfigFile::string_or(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const std::string* s = std::get_if<std::string>(&it->second)) return *s;
  throw ConfigError("config: key '" + key + "' is not a string");
}

std::optional<std::vector<double>> ConfigFile::array(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* a = std::get_if<std::vector<double>>(&it->second)) return *a;
  throw ConfigError("config: key '" + key + "' is not an array");
}

void ConfigFile::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = trim(assignment.substr(0, eq));
  const std::string raw = assignment.substr(eq + 1);
  try {
    values_[key] = parse_value(raw, 0);
  } catch (const ConfigError&) {
    // bare strings are fine on the command line, the shell strips quotes
    values_[key] = trim(raw);
  }
}

}  // namespace homdip
