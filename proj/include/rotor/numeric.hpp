#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rotor {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Reduce x into [0, 2*pi). Subtracting the double constant two_pi from a
// value in [two_pi, 2*two_pi) is exact (Sterbenz), so wrapping introduces
// no error of its own for arguments within a few periods; callers that
// only ever add bounded increments to an already-wrapped angle stay on
// the torus at machine precision indefinitely.
inline double wrap_two_pi(double x) {
    while (x >= two_pi) x -= two_pi;
    while (x < 0.0) x += two_pi;
    return x;
}

// Compensated (Kahan) accumulator. Used for ensemble reductions so that
// summation error stays O(eps) independent of ensemble size and the
// result does not depend on how many points were summed between flushes.
class KahanSum {
public:
    void add(double x) {
        const double y = x - carry_;
        const double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    void merge(const KahanSum& other) {
        add(other.sum_);
        add(-other.carry_);
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

// Deterministic uniform double in [0,1) from the raw 64-bit stream.
// std::mt19937_64 output is pinned by the standard, so this mapping is
// reproducible across standard libraries, unlike std::*_distribution.
template <class Rng>
double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Portable Box-Muller normal deviate (mean 0, unit variance).
template <class Rng>
double normal_deviate(Rng& rng) {
    double u1 = uniform_unit(rng);
    while (u1 == 0.0) u1 = uniform_unit(rng);
    const double u2 = uniform_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

} // namespace rotor
