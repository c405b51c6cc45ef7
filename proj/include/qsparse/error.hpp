#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qsparse {

// Malformed arguments: empty vectors, dimension mismatches, out-of-range levels.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Exhaustive search refused because the instance is too large.
class CombinatorialLimit : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// Root bracketing, quadrature or Monte Carlo procedures that could not deliver.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CalibrationError : public NumericError {
public:
    using NumericError::NumericError;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace qsparse
