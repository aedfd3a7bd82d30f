#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace specfp {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A value violates a type invariant (negative energy, NaN coordinate, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Arithmetic between spectra that belong to different sub-band layouts.
class LayoutMismatchError : public Error {
public:
    using Error::Error;
};

/// Degenerate scene geometry (sensor coincident with a light or surface).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known (0 = whole file).
class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& what)
        : Error(row == 0 ? what : "row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

/// Invalid configuration: unknown sensor label, bad mask size, missing group tag, ...
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Tensor shapes inconsistent with the input length or spot count.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Training diverged. Carries the epoch at which the loss became non-finite.
class TrainingError : public Error {
public:
    TrainingError(int epoch, const std::string& what)
        : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

} // namespace specfp
