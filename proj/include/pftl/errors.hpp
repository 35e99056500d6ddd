#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pftl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed model file or formula text. Carries a 1-based line and column.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class ModelError : public Error {
public:
    using Error::Error;
};

class FormulaError : public Error {
public:
    using Error::Error;
};

/// The formula lies outside the fragment an engine accepts.
class FragmentError : public FormulaError {
public:
    using FormulaError::FormulaError;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace pftl
