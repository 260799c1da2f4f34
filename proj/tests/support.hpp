#pragma once

#include <complex>
#include <random>
#include <vector>

#include "rotor/bessel.hpp"
#include "rotor/numeric.hpp"
#include "rotor/quantum.hpp"

namespace rotor::test {

using cplx = std::complex<double>;

// Dense-matrix reference propagation on the integer ladder |m| <= half:
// kick via the Bessel matrix element oracle, then the free phase. Kept
// independent of the spectral (FFT) implementation path on purpose.
inline std::vector<cplx> dense_step(const std::vector<cplx>& in, double k, double tau, int sign,
                                    int half) {
    const int dim = 2 * half + 1;
    std::vector<cplx> out(static_cast<std::size_t>(dim), cplx{0.0, 0.0});
    // One Bessel array evaluation serves every matrix element.
    const auto j = bessel_jn_array(2 * half, sign * k);
    for (int m = -half; m <= half; ++m) {
        cplx acc{0.0, 0.0};
        for (int mp = -half; mp <= half; ++mp) {
            const int d = m - mp;
            const double jd = (d < 0 && (-d) % 2 != 0) ? -j[static_cast<std::size_t>(-d)]
                                                       : j[static_cast<std::size_t>(std::abs(d))];
            acc += minus_i_pow(d) * jd * in[static_cast<std::size_t>(mp + half)];
        }
        out[static_cast<std::size_t>(m + half)] =
            acc * std::polar(1.0, -0.5 * tau * static_cast<double>(m) * m);
    }
    return out;
}

// Normalized random state with support confined to |m| <= support so the
// edge-occupancy guard stays quiet during propagation.
inline QuantumState random_state(std::int64_t half_size, int boundary_mult, double tau,
                                 std::int64_t support, std::uint64_t seed) {
    QuantumState psi(half_size, boundary_mult, tau);
    std::mt19937_64 rng(seed);
    KahanSum norm2;
    for (std::int64_t m = -support; m <= support; ++m) {
        const cplx v(normal_deviate(rng), normal_deviate(rng));
        psi.set_amplitude(m, v);
        norm2.add(std::norm(v));
    }
    const double inv = 1.0 / std::sqrt(norm2.value());
    auto* a = psi.storage();
    for (std::int64_t i = 0; i < psi.size(); ++i) a[i] *= inv;
    return psi;
}

} // namespace rotor::test
