#pragma once

#include <stdexcept>
#include <string>

namespace homdip {

// Invalid parameters, malformed configs, out-of-contract inputs. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Quadrature/aliasing failures and other numerical breakdowns. CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace homdip
