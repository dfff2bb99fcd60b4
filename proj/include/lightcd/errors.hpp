#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lightcd {

/// Base class of all errors thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A sample or window does not have the expected number of dimensions.
class DimensionMismatchError : public Error {
public:
    DimensionMismatchError(std::int64_t expected, std::int64_t actual)
        : Error("dimension mismatch: expected " + std::to_string(expected) +
                " values, got " + std::to_string(actual)),
          expected(expected),
          actual(actual) {}

    std::int64_t expected;
    std::int64_t actual;
};

/// The window carries no usable variance (e.g. constant data).
class DegenerateWindowError : public Error {
public:
    explicit DegenerateWindowError(const std::string& what) : Error(what) {}
};

/// A value lies outside the bounds a closed form was told to integrate over.
class OutOfBoundsError : public Error {
public:
    explicit OutOfBoundsError(const std::string& what) : Error(what) {}
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line(line) {}

    std::size_t line;
};

/// Invalid configuration value or key.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

/// A caller-supplied precondition does not hold (e.g. delta too small).
class InvariantViolationError : public Error {
public:
    explicit InvariantViolationError(const std::string& what) : Error(what) {}
};

}  // namespace lightcd
