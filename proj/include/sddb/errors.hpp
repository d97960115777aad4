#pragma once

#include <stdexcept>
#include <string>

namespace sddb {

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data (CSV and friends). Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Invalid configuration or violated precondition. Recoverable by fixing inputs.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numeric failure during computation (diverging recursions and similar).
class NumericError : public Error {
public:
    using Error::Error;
};

class DegenerateSeries : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class GridTooCoarse : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class NonPositiveDensity : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class InvalidKurtosis : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ZeroVariance : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class CombinerDomain : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class FloorViolation : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class TooFewReplicates : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ExplosivePath : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace sddb
