#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lia {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor or vector dimensions disagree with a contract.
struct ShapeError : Error {
    using Error::Error;
};

/// A malformed input file. Carries the 1-based line number when known.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line_number)
        : Error(msg + " (line " + std::to_string(line_number) + ")"), line(line_number) {}
    explicit ParseError(const std::string& msg) : Error(msg), line(0) {}
    std::size_t line;
};

/// Input data violates a dataset invariant.
struct ValidationError : Error {
    using Error::Error;
};

/// Inconsistent or incomplete configuration.
struct ConfigError : Error {
    using Error::Error;
};

/// A non-finite value was produced or consumed. `index` is the offending
/// coordinate when known, -1 otherwise.
struct NumericError : Error {
    explicit NumericError(const std::string& msg, std::ptrdiff_t offending_index = -1)
        : Error(msg), index(offending_index) {}
    std::ptrdiff_t index;
};

}  // namespace lia
