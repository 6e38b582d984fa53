#pragma once

#include <stdexcept>
#include <string>

namespace riskdp {

/// Malformed or schema-violating experiment configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exhaustive enumeration exceeded its size guard.
class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace riskdp
