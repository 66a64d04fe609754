#pragma once

#include <stdexcept>
#include <string>

namespace homog {

/// Malformed or inconsistent configuration / input schema.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A model assumption check failed (bounds, centering, periodicity, ...).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numerical procedure could not meet its tolerance or budget.
struct NumericsError : std::runtime_error {
  explicit NumericsError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace homog
