#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace fsp {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Chart point outside the declared domain of a metric (horizon margin, etc.).
struct DomainError : Error {
    using Error::Error;
};

// Metric determinant magnitude below the configured floor.
struct SingularMetric : Error {
    using Error::Error;
};

// A computed component came out NaN or infinite.
struct NonFiniteResult : Error {
    using Error::Error;
};

// Two sampled quantities were expected on a common grid and are not.
struct GridMismatch : Error {
    using Error::Error;
};

// A metric fluctuation draw made the matrix non-invertible. Carries the draw
// so the caller can decide to redraw or abort.
struct AmplitudeError : Error {
    AmplitudeError(const std::string& msg, std::array<std::array<double, 4>, 4> draw)
        : Error(msg), gamma_draw(draw) {}
    std::array<std::array<double, 4>, 4> gamma_draw;
};

// |psi| fell below the floor where a logarithmic derivative was requested.
struct AmplitudeFloor : Error {
    using Error::Error;
};

// One-sided derivative requested at a grid end.
struct BoundaryError : Error {
    using Error::Error;
};

// Plot input CSV lacks a requested column.
struct MissingColumn : Error {
    using Error::Error;
};

}  // namespace fsp
