#pragma once

#include <stdexcept>
#include <string>

namespace muflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Antiderivative requested for a field whose mean is not (numerically) zero;
// the inversion of d/dx on the circle is ill-posed in that case.
struct MeanNotZeroError : Error { using Error::Error; };

// A map of the circle failed the monotonicity test dxi > 0.
struct NotADiffeoError : Error { using Error::Error; };

// Density with a zero crossing handed to an operation that needs m != 0.
struct NotInMLambdaError : Error { using Error::Error; };

struct DomainError : Error { using Error::Error; };
struct CollisionError : Error { using Error::Error; };
struct NonPositiveDensityError : Error { using Error::Error; };
struct UndefinedFunctionalError : Error { using Error::Error; };
struct HypothesisViolatedError : Error { using Error::Error; };
struct FitFailedError : Error { using Error::Error; };
struct DegenerateQError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

/// Failure while parsing an initial-condition expression. Carries the byte
/// offset into the source text and a description of what was expected there.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t position, std::string expected_what)
        : Error(msg), pos(position), expected(std::move(expected_what)) {}
    std::size_t pos;
    std::string expected;
};

/// Expression evaluated to a non-finite value at some grid point.
struct EvalError : Error { using Error::Error; };

} // namespace muflow
