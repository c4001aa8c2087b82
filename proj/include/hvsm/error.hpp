#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hvsm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0);

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// Arguments violate an operation's precondition (unknown version, shape mismatch, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A quantity is mathematically undefined for the given input (e.g. CE with no bugs).
class UndefinedMetric : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    TrainingError(const std::string& what, std::size_t iteration);
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

} // namespace hvsm
