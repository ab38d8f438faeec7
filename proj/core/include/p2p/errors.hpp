#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace p2p {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct NotSymmetricError : Error {
    using Error::Error;
};

struct NotPositiveDefiniteError : Error {
    NotPositiveDefiniteError(const std::string& what, std::size_t pivot)
        : Error(what), pivot_index(pivot) {}
    std::size_t pivot_index;
};

struct SingularMatrixError : Error {
    SingularMatrixError(const std::string& what, std::size_t pivot)
        : Error(what), pivot_index(pivot) {}
    std::size_t pivot_index;
};

struct ConvergenceError : Error {
    using Error::Error;
};

struct NonFiniteError : Error {
    using Error::Error;
};

struct ZeroCessionError : Error {
    using Error::Error;
};

struct NegativeCessionError : Error {
    using Error::Error;
};

struct EmptyCoalitionError : Error {
    using Error::Error;
};

struct TooManyMembersError : Error {
    using Error::Error;
};

/// A feasibility LP turned out infeasible; carries the phase-1 residual as certificate.
struct InfeasibleError : Error {
    InfeasibleError(const std::string& what, double residual)
        : Error(what), phase1_residual(residual) {}
    double phase1_residual;
};

struct GridError : Error {
    using Error::Error;
};

struct ParamsMismatchError : Error {
    using Error::Error;
};

/// Configuration errors carry the JSON field path that failed.
struct ValidationError : Error {
    ValidationError(const std::string& what, std::string path)
        : Error(what + " (at " + path + ")"), field_path(std::move(path)) {}
    std::string field_path;
};

struct ParseError : Error {
    using Error::Error;
};

}  // namespace p2p
