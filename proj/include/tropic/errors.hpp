#pragma once

#include <stdexcept>
#include <string>

namespace tropic {

/// Base class for all tropic errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when two scalars of different semifield kinds are combined.
struct KindMismatchError : Error {
    using Error::Error;
};

/// Raised on incompatible matrix/vector shapes.
struct ShapeError : Error {
    using Error::Error;
};

/// Raised for undefined scalar operations (e.g. zero to a nonpositive power).
struct DomainError : Error {
    using Error::Error;
};

/// Raised when a text input (matrix literal, network spec, distribution) fails to parse.
struct ParseError : Error {
    using Error::Error;
};

/// Raised when a network spec violates a model invariant.
struct ModelInvalidError : Error {
    using Error::Error;
};

/// Raised when a Lyapunov estimate is requested but the existence check failed.
struct ExistenceError : Error {
    using Error::Error;
};

/// Raised when a decomposition requires independent factors but they share variables.
struct DependencyError : Error {
    using Error::Error;
};

} // namespace tropic
