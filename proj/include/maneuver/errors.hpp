#pragma once

#include <stdexcept>
#include <string>

namespace maneuver {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested curvature is outside what the steering range can realize.
struct CurvatureExceeded : Error {
    using Error::Error;
};

// Spline segment with a non-positive local length cannot be solved.
struct DegenerateSegment : Error {
    using Error::Error;
};

// Image or occupancy-grid input could not be read.
struct MapLoadError : Error {
    using Error::Error;
};

// Checkpoint file is missing, malformed, or shaped for a different network.
struct CheckpointError : Error {
    using Error::Error;
};

// Parameter/input dimensions disagree with the architecture config.
struct ShapeMismatch : Error {
    using Error::Error;
};

// Dataset files are missing or inconsistent with their manifest.
struct DatasetError : Error {
    using Error::Error;
};

// Backpropagation produced a NaN or infinity.
struct NonFiniteGradient : Error {
    using Error::Error;
};

}  // namespace maneuver
