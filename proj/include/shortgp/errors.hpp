#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shortgp {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature exhausted its evaluation budget.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// Iterative root finding or optimization did not converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Gram matrix could not be factorized even after the jitter escalation.
class FactorizationError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent time series / scenario.
class DataError : public Error {
public:
    using Error::Error;
};

class InvalidScenario : public Error {
public:
    using Error::Error;
};

/// Every restart of a fit failed.
class FitFailed : public Error {
public:
    using Error::Error;
};

/// Bad configuration file or option value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input text could not be parsed. `line()` is 1-based, 0 when unknown.
class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t line)
        : DataError(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace shortgp
