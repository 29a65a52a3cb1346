#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace abundanza {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation
/// (log of a non-positive ball, n below a statistic's floor, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A decision (sign, floor, hull orientation, stream ordering) stayed
/// ambiguous at the maximum precision of the retry ladder.
class PrecisionError : public Error {
public:
    using Error::Error;
};

/// A requested computation exceeds the configured memory budget.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// Two critical epsilons could not be separated at maximum precision.
/// Carries the provenance (p, k) of both candidates.
class TieDetected : public Error {
public:
    TieDetected(std::string msg,
                std::pair<std::uint64_t, unsigned> first,
                std::pair<std::uint64_t, unsigned> second)
        : Error(std::move(msg)), first_(first), second_(second) {}

    std::pair<std::uint64_t, unsigned> first() const { return first_; }
    std::pair<std::uint64_t, unsigned> second() const { return second_; }

private:
    std::pair<std::uint64_t, unsigned> first_;
    std::pair<std::uint64_t, unsigned> second_;
};

/// Malformed CSV input; carries the 1-based offending line.
class CsvError : public Error {
public:
    CsvError(std::string msg, std::size_t line)
        : Error(std::move(msg)), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

}  // namespace abundanza
