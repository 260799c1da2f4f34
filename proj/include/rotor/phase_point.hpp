#pragma once

#include <cmath>

namespace rotor {

// Classical phase-space point: scaled angular momentum and angle.
// theta is reported in [0, 2*pi); l_tilde carries the full accumulated
// momentum (it is not reduced to a cell).
struct PhasePoint {
    double l_tilde = 0.0;
    double theta = 0.0;

    bool finite() const { return std::isfinite(l_tilde) && std::isfinite(theta); }
};

} // namespace rotor
