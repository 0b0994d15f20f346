#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sabrfem {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter or configuration value is outside its admissible range.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A weighted integral diverges at x = 0 (combined exponent <= -1).
class SingularIntegralError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or a singular system during a solve.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, std::ptrdiff_t step = -1)
        : Error(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what), step_(step) {}

    std::ptrdiff_t step() const noexcept { return step_; }

private:
    std::ptrdiff_t step_;
};

class UnsupportedConfiguration : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace sabrfem
