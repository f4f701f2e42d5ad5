#pragma once

#include <stdexcept>
#include <string>

namespace shrinkpo {

// Bad user input: malformed files, inconsistent dimensions, invalid config.
// Maps to CLI exit code 1.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: degenerate estimator input, solver breakdown.
// Maps to CLI exit code 2.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace shrinkpo
