#pragma once

#include <stdexcept>
#include <string>

namespace tabdiff {

// Bad usage, unreadable files, schema violations. CLI exit code 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Failures during computation (NaN loss, degenerate numerics that cannot
// be reported in-band). CLI exit code 2.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tabdiff
