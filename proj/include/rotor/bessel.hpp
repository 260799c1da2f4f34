#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "rotor/errors.hpp"

namespace rotor {

// All J_n(x) for n = 0..n_max by Miller's downward recurrence. The
// magnitude is normalized with J_0^2 + 2*sum_{n>=1} J_n^2 = 1 (all terms
// positive, no cancellation) and the overall sign is fixed from the
// alternating sum J_0 + 2*sum_k J_{2k} = 1. Downward recursion is stable
// for every order, so the tiny high-order values that an upward pass would
// destroy come out at full precision, and the quadratic normalization
// makes the unitary kick-matrix column norms equal 1 to machine precision
// by construction, even at k = 35.
inline std::vector<double> bessel_jn_array(int n_max, double x) {
    if (n_max < 0) throw ParameterError("bessel_jn_array: n_max must be >= 0");
    std::vector<double> j(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (x == 0.0) {
        j[0] = 1.0;
        return j;
    }
    const double ax = std::abs(x);

    // Start far enough above both the order and the turning point n ~ |x|.
    const double top = std::max(static_cast<double>(n_max), ax);
    int start = n_max + 16 + static_cast<int>(std::sqrt(52.0 * top));
    if (start % 2 != 0) ++start; // even start keeps the sign sum aligned

    double jp = 0.0;    // J_{n+1}
    double jc = 1e-30;  // J_n (arbitrary seed, rescaled away)
    double norm2 = 0.0; // J_0^2 + 2*sum_{n>=1} J_n^2
    double alt = 0.0;   // J_0 + 2*sum J_{2k}
    for (int n = start; n > 0; --n) {
        double jm = (2.0 * n / ax) * jc - jp;
        jp = jc;
        jc = jm;
        if (std::abs(jc) > 1e140) { // rescale to keep squares in range
            const double s = 1e-140;
            jc *= s;
            jp *= s;
            norm2 *= s * s;
            alt *= s;
            for (auto& v : j) v *= s;
        }
        if (n - 1 <= n_max) j[static_cast<std::size_t>(n - 1)] = jc;
        norm2 += (n - 1 == 0) ? jc * jc : 2.0 * jc * jc;
        if ((n - 1) % 2 == 0) alt += (n - 1 == 0) ? jc : 2.0 * jc;
    }
    const double scale = (alt < 0.0 ? -1.0 : 1.0) / std::sqrt(norm2);
    for (auto& v : j) v *= scale;
    if (x < 0.0)
        for (std::size_t n = 1; n < j.size(); n += 2) j[n] = -j[n];
    return j;
}

inline double bessel_jn(int n, double x) {
    const int an = std::abs(n);
    const double v = bessel_jn_array(an, x)[static_cast<std::size_t>(an)];
    return (n < 0 && an % 2 != 0) ? -v : v;
}

// (-i)^p for integer p, exactly.
inline std::complex<double> minus_i_pow(std::int64_t p) {
    switch (((p % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
    }
}

// Matrix element <m| exp(-i k cos(theta)) |mp> = (-i)^(m-mp) J_{m-mp}(k)
// on the integer momentum ladder. This is the dense-matrix route to the
// kick operator, independent of the spectral (FFT) route, and is used as
// the test oracle for it.
inline std::complex<double> kick_matrix_element(std::int64_t m, std::int64_t mp, double k) {
    const std::int64_t d = m - mp;
    return minus_i_pow(d) * bessel_jn(static_cast<int>(d), k);
}

} // namespace rotor
