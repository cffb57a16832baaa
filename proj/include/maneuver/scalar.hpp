#pragma once

#include "maneuver/autodiff.hpp"

namespace maneuver {

// Plain value of a generic scalar; lets templated math branch on magnitudes
// without touching the tape.
inline double value_of(double x) { return x; }
inline double value_of(const ad::Var& v) { return v.value(); }

}  // namespace maneuver
