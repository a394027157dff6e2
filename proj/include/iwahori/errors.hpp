#pragma once

#include <stdexcept>
#include <string>

namespace iwahori {

/// A valuation or digit needed by a computation lies beyond the tracked precision.
class PrecisionError : public std::runtime_error {
 public:
  explicit PrecisionError(const std::string& what) : std::runtime_error("precision exhausted: " + what) {}
};

/// Operands built from different contexts, or an ambient-space mismatch.
class ContextMismatch : public std::logic_error {
 public:
  explicit ContextMismatch(const std::string& what) : std::logic_error("context mismatch: " + what) {}
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iwahori
