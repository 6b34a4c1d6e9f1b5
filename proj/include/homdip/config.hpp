#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace homdip {

// TOML-style scenario files: `[table]` headers, `key = value` pairs, `#`
// comments. Values are numbers, booleans, quoted strings, or flat arrays of
// numbers. Keys flatten to "table.key".
class ConfigFile {
 public:
  using Value = std::variant<double, bool, std::string, std::vector<double>>;

  static ConfigFile parse(const std::string& text);
  static ConfigFile parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  std::optional<std::vector<double>> array(const std::string& key) const;

  // Applies a CLI `--set table.key=value` override (scalars only).
  void set_override(const std::string& assignment);

  const std::map<std::string, Value>& values() const { return values_; }

 private:
  std::map<std::string, Value> values_;
};

}  // namespace homdip
