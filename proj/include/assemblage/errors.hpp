#pragma once

#include <stdexcept>
#include <string>

namespace assemblage {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Matrix/vector dimensions do not line up.
struct ShapeMismatch : Error {
    using Error::Error;
};

/// A field holds a value outside its documented domain (tau, lambda, ...).
struct InvalidInput : Error {
    using Error::Error;
};

/// Equality constraints cannot be met under the nonnegativity bounds.
struct InfeasibleConstraints : Error {
    using Error::Error;
};

/// Iteration cap reached with KKT residuals above tolerance.
struct NotConverged : Error {
    NotConverged(const std::string& msg, double stationarity, double feasibility, int iters)
        : Error(msg), kkt_stationarity(stationarity), kkt_feasibility(feasibility), iterations(iters) {}
    double kkt_stationarity;
    double kkt_feasibility;
    int iterations;
};

/// brute_force_oracle asked to sweep a feasible set of dimension > 2 (or K > 3).
struct TooManyDimensions : Error {
    using Error::Error;
};

struct InsufficientHistory : Error {
    using Error::Error;
};

struct NonPositiveLevel : Error {
    using Error::Error;
};

struct InsufficientFuture : Error {
    using Error::Error;
};

struct EmptyIntersection : Error {
    using Error::Error;
};

struct WindowTooLong : Error {
    using Error::Error;
};

struct TooFewObservations : Error {
    using Error::Error;
};

struct MeanNearZero : Error {
    using Error::Error;
};

struct DegenerateSeries : Error {
    using Error::Error;
};

struct UnmappedComponent : Error {
    using Error::Error;
};

/// Configuration / data-file problems (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace assemblage
