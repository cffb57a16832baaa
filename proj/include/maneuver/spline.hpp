#pragma once

#include <span>
#include <vector>

#include "maneuver/pathcalc.hpp"

namespace maneuver {

using SegmentSpec = SegSpecT<double>;
using QuinticSegment = QuinticT<double>;
using PathSample = PathSampleT<double>;

struct PathSpline {
    std::vector<QuinticSegment> segments;
    int points_per_segment = kSamplesPerSegment;
};

struct DiscretizedPath {
    std::vector<std::array<PathSample, kSamplesPerSegment>> segments;

    double total_length() const;
    double max_abs_kappa() const;
    // Sum of |heading change| between consecutive samples.
    double accumulated_turn() const;
    const PathSample& last_sample() const { return segments.back().back(); }
};

QuinticSegment solve_segment(double start_curvature, const SegmentSpec& spec);

PathSpline chain(const Configuration& initial, const VehicleParams& params,
                 std::span<const SegmentSpec> specs);

DiscretizedPath discretize(const PathSpline& path);

// Pose and steering at the final endpoint. Sets *curvature_exceeded (if given)
// when |kappa_end| > curvature_limit; beta is still returned so callers can
// score the path infeasible instead of aborting.
Configuration endpoint_configuration(const PathSpline& path, const VehicleParams& params,
                                     bool* curvature_exceeded = nullptr);

}  // namespace maneuver
