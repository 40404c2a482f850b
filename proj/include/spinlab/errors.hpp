#pragma once

#include <stdexcept>
#include <string>

namespace spinlab {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid geometry input (degenerate aspect, bad resolution, empty mask).
struct ShapeError : Error {
    using Error::Error;
};

/// API misuse: grid mismatch, violated preconditions.
struct UsageError : Error {
    using Error::Error;
};

/// Snapshot / file I/O failures (bad magic, truncated data, mask mismatch).
struct IoError : Error {
    using Error::Error;
};

/// Time integration blow-up; carries the last time with finite state.
struct IntegrationError : Error {
    double last_good_time;
    IntegrationError(const std::string& what, double t) : Error(what), last_good_time(t) {}
};

/// Computation-level failure (non-convergence, solver breakdown).
struct ComputeError : Error {
    using Error::Error;
};

/// Refusal to shoot on a shape without a simple smallest demag eigenvalue.
struct ShapeConditionError : Error {
    double gap;  // measured lambda2 - lambda1
    ShapeConditionError(const std::string& what, double gap_in) : Error(what), gap(gap_in) {}
};

}  // namespace spinlab
