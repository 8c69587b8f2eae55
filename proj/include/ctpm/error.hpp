#pragma once

#include <stdexcept>
#include <string>

namespace ctpm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV/JSON). Carries the 1-based line when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Two rows set the same (patient, feature, wave) cell.
class ConflictError : public ParseError {
public:
    using ParseError::ParseError;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Percentile fitting failures.
class FitError : public Error {
public:
    using Error::Error;
};

class DegenerateDistributionError : public FitError {
public:
    using FitError::FitError;
};

/// Category not listed in a categorical rule.
class MappingError : public Error {
public:
    using Error::Error;
};

/// Risk measure requested for a pattern present in all or no patients.
class UndefinedRiskError : public Error {
public:
    using Error::Error;
};

/// C-index with zero comparable pairs.
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// Input too large for the exhaustive oracle.
class GuardError : public Error {
public:
    using Error::Error;
};

}  // namespace ctpm
