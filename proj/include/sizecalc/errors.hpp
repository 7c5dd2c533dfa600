#pragma once

#include <stdexcept>
#include <string>

namespace sizecalc {

enum class ErrorKind {
    InvalidArgument,
    NonConvergence,
    DegenerateOutcome,
    ConstantPredictor,
    DomainError,
    NoSolution,
    NoRoot,
    BracketFailure,
    ExcessiveFailures,
    EmptyDistribution,
    NonPositiveDefinite,
    CalibrationFailure,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidArgument:     return "InvalidArgument";
    case ErrorKind::NonConvergence:      return "NonConvergence";
    case ErrorKind::DegenerateOutcome:   return "DegenerateOutcome";
    case ErrorKind::ConstantPredictor:   return "ConstantPredictor";
    case ErrorKind::DomainError:         return "DomainError";
    case ErrorKind::NoSolution:          return "NoSolution";
    case ErrorKind::NoRoot:              return "NoRoot";
    case ErrorKind::BracketFailure:      return "BracketFailure";
    case ErrorKind::ExcessiveFailures:   return "ExcessiveFailures";
    case ErrorKind::EmptyDistribution:   return "EmptyDistribution";
    case ErrorKind::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorKind::CalibrationFailure:  return "CalibrationFailure";
    }
    return "Error";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool condition, const std::string& what)
{
    if (!condition)
        fail(ErrorKind::InvalidArgument, what);
}

} // namespace sizecalc
