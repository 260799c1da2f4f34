#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "rotor/energy_series.hpp"
#include "rotor/errors.hpp"
#include "rotor/numeric.hpp"
#include "rotor/parallel.hpp"
#include "rotor/phase_point.hpp"
#include "rotor/schedule.hpp"

namespace rotor {

// One kick of the (possibly sign-modulated) standard map:
//   L' = L + sign * kappa * sin(theta)
//   theta' = theta + L'
// A full MKR cycle is four calls with signs (+,+,-,-).
inline PhasePoint map_step(const PhasePoint& p, double kappa, int sign) {
    if (!p.finite()) throw NumericError("map_step: non-finite phase point");
    if (sign != 1 && sign != -1) throw ParameterError("map_step: sign must be +1 or -1");
    PhasePoint out;
    out.l_tilde = p.l_tilde + sign * kappa * std::sin(p.theta);
    out.theta = p.theta + out.l_tilde;
    return out;
}

// Algebraic inverse of map_step: theta = theta' - L', L = L' - sign*kappa*sin(theta).
inline PhasePoint map_step_inverse(const PhasePoint& p, double kappa, int sign) {
    if (!p.finite()) throw NumericError("map_step_inverse: non-finite phase point");
    PhasePoint out;
    out.theta = p.theta - p.l_tilde;
    out.l_tilde = p.l_tilde - sign * kappa * std::sin(out.theta);
    return out;
}

namespace detail {

// Long-run trajectory state. The angle and a torus-reduced copy of the
// momentum are kept in [0, 2*pi) so every sin() argument and every angle
// update is small-number arithmetic; the wrap subtraction is exact
// (Sterbenz) there, so no angle error accumulates from the reduction
// itself. l_full carries the physical (unreduced) momentum for energy and
// transport observables. Keeping theta unreduced instead would let its
// representation error grow with |theta| and visibly pollute sin() after
// ~1e4 kicks on ballistic orbits.
struct TrajState {
    double l_full;
    double l_carry = 0.0; // Kahan carry for l_full
    double l_wrap;
    double theta;

    explicit TrajState(const PhasePoint& p)
        : l_full(p.l_tilde),
          l_wrap(wrap_any(p.l_tilde)),
          theta(wrap_any(p.theta)) {}

    static double wrap_any(double x) {
        if (x >= 0.0 && x < two_pi) return x;
        if (std::abs(x) < 4.0 * two_pi) return wrap_two_pi(x);
        x = std::fmod(x, two_pi); // exact remainder
        return x < 0.0 ? x + two_pi : x;
    }

    void kick(double kappa, int sign) {
        const double impulse = sign * kappa * std::sin(theta);
        // Compensated momentum accumulation: on ballistic orbits l_full
        // reaches ~1e4 while each impulse is O(kappa), and plain addition
        // rounding would dominate the marginal-point drift budget.
        const double y = impulse - l_carry;
        const double t = l_full + y;
        l_carry = (t - l_full) - y;
        l_full = t;
        l_wrap = wrap_two_pi(l_wrap + impulse);
        theta = wrap_two_pi(theta + l_wrap);
    }

    PhasePoint point() const { return {l_full, theta}; }
};

} // namespace detail

// Set of classical phase-space points evolved together. `seed` records the
// RNG seed when the ensemble was sampled (absent for deterministic grids).
struct ClassicalEnsemble {
    std::vector<PhasePoint> points;
    std::optional<std::uint64_t> seed;

    std::size_t size() const { return points.size(); }
};

// L = 0 line with equally spaced angles; stratification kills the
// Monte-Carlo variance a random draw would put into the energy series.
// Cell-centered offsets keep the sin(theta)=0 fixed points at theta = 0
// and pi off the grid for even n.
inline ClassicalEnsemble uniform_theta_ensemble(std::size_t n) {
    if (n == 0) throw ParameterError("uniform_theta_ensemble: empty ensemble");
    ClassicalEnsemble e;
    e.points.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        e.points[i] = {0.0, (static_cast<double>(i) + 0.5) * two_pi / static_cast<double>(n)};
    return e;
}

inline ClassicalEnsemble random_uniform_ensemble(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ParameterError("random_uniform_ensemble: empty ensemble");
    ClassicalEnsemble e;
    e.points.resize(n);
    e.seed = seed;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) e.points[i] = {0.0, two_pi * uniform_unit(rng)};
    return e;
}

// Product-Gaussian phase-space sample centered at (theta, L) = (0, 0) with
// std devs (sigma_theta, tau / (2 sigma_theta)): the Wigner function of a
// minimum-uncertainty Gaussian state, usable directly as a classical
// initial distribution. Coordinates are stored unreduced so sample moments
// reflect the distribution.
inline ClassicalEnsemble sample_wigner_gaussian(double sigma_theta, double tau, std::size_t n,
                                                std::uint64_t seed) {
    if (!(sigma_theta > 0.0)) throw ParameterError("sample_wigner_gaussian: sigma_theta must be > 0");
    if (n == 0) throw ParameterError("sample_wigner_gaussian: empty ensemble");
    const double sigma_l = tau / (2.0 * sigma_theta);
    ClassicalEnsemble e;
    e.points.resize(n);
    e.seed = seed;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = sigma_theta * normal_deviate(rng);
        const double l = sigma_l * normal_deviate(rng);
        e.points[i] = {l, theta};
    }
    return e;
}

struct PhaseCell {
    double theta_min = 0.0;
    double theta_max = two_pi;
    double l_min = 0.0;
    double l_max = two_pi;
};

// Cell-centered lattice of per_axis x per_axis points over a cell.
inline ClassicalEnsemble grid_ensemble(const PhaseCell& cell, std::size_t per_axis) {
    if (per_axis == 0) throw ParameterError("grid_ensemble: empty grid");
    const double dth = (cell.theta_max - cell.theta_min) / static_cast<double>(per_axis);
    const double dl = (cell.l_max - cell.l_min) / static_cast<double>(per_axis);
    if (!(dth > 0.0) || !(dl > 0.0)) throw ParameterError("grid_ensemble: degenerate cell");
    ClassicalEnsemble e;
    e.points.reserve(per_axis * per_axis);
    for (std::size_t iy = 0; iy < per_axis; ++iy)
        for (std::size_t ix = 0; ix < per_axis; ++ix)
            e.points.push_back({cell.l_min + (static_cast<double>(iy) + 0.5) * dl,
                                cell.theta_min + (static_cast<double>(ix) + 0.5) * dth});
    return e;
}

// Mean of L^2 / 2 over the ensemble.
inline double classical_energy(const ClassicalEnsemble& e) {
    if (e.points.empty()) throw ParameterError("classical_energy: empty ensemble");
    const auto n = static_cast<std::int64_t>(e.points.size());
    KahanSum total = parallel_reduce_chunks<KahanSum>(
        n, reduction_chunks,
        [&](int, std::int64_t lo, std::int64_t hi) {
            KahanSum s;
            for (std::int64_t i = lo; i < hi; ++i) {
                const double l = e.points[static_cast<std::size_t>(i)].l_tilde;
                s.add(l * l);
            }
            return s;
        },
        [](KahanSum a, const KahanSum& b) {
            a.merge(b);
            return a;
        },
        KahanSum{});
    return total.value() / (2.0 * static_cast<double>(n));
}

// Evolve every point through n_kicks kicks of the schedule and record the
// ensemble energy after each kick (values[0] is the initial energy).
// Deterministic given the input ensemble; the reduction runs over a fixed
// chunk partition so the series does not depend on the thread count.
inline std::pair<ClassicalEnsemble, EnergySeries> evolve_ensemble(const ClassicalEnsemble& e,
                                                                  const KickSchedule& schedule,
                                                                  double kappa,
                                                                  std::int64_t n_kicks) {
    if (e.points.empty()) throw ParameterError("evolve_ensemble: empty ensemble");
    if (n_kicks < 1) throw ParameterError("evolve_ensemble: n_kicks must be >= 1");
    for (const auto& p : e.points)
        if (!p.finite()) throw NumericError("evolve_ensemble: non-finite phase point");

    const auto n = static_cast<std::int64_t>(e.points.size());
    const int chunks = static_cast<int>(std::min<std::int64_t>(reduction_chunks, n));
    const std::size_t n_rec = static_cast<std::size_t>(n_kicks) + 1;

    ClassicalEnsemble out;
    out.points.resize(e.points.size());
    out.seed = e.seed;
    std::vector<std::vector<KahanSum>> partial(static_cast<std::size_t>(chunks),
                                               std::vector<KahanSum>(n_rec));

    parallel_for_chunks(n, chunks, [&](int c, std::int64_t lo, std::int64_t hi) {
        auto& acc = partial[static_cast<std::size_t>(c)];
        for (std::int64_t i = lo; i < hi; ++i) {
            detail::TrajState t(e.points[static_cast<std::size_t>(i)]);
            acc[0].add(t.l_full * t.l_full);
            for (std::int64_t kick = 1; kick <= n_kicks; ++kick) {
                t.kick(kappa, schedule.sign(kick));
                acc[static_cast<std::size_t>(kick)].add(t.l_full * t.l_full);
            }
            out.points[static_cast<std::size_t>(i)] = t.point();
        }
    });

    EnergySeries series;
    series.kind = EnsembleKind::Classical;
    series.values.resize(n_rec);
    for (std::size_t kick = 0; kick < n_rec; ++kick) {
        KahanSum s;
        for (int c = 0; c < chunks; ++c) s.merge(partial[static_cast<std::size_t>(c)][kick]);
        series.values[kick] = s.value() / (2.0 * static_cast<double>(n));
    }
    return {std::move(out), std::move(series)};
}

// Single-orbit iteration: the phase point after each of n_kicks kicks.
inline std::vector<PhasePoint> trajectory(const PhasePoint& p0, const KickSchedule& schedule,
                                          double kappa, std::int64_t n_kicks) {
    if (!p0.finite()) throw NumericError("trajectory: non-finite phase point");
    if (n_kicks < 1) throw ParameterError("trajectory: n_kicks must be >= 1");
    std::vector<PhasePoint> out;
    out.reserve(static_cast<std::size_t>(n_kicks));
    detail::TrajState t(p0);
    for (std::int64_t kick = 1; kick <= n_kicks; ++kick) {
        t.kick(kappa, schedule.sign(kick));
        out.push_back(t.point());
    }
    return out;
}

// (theta mod 2*pi, L mod 2*pi) after every kick for every trajectory,
// trajectory-major: n_kicks points per grid point.
inline std::vector<std::array<double, 2>> poincare_section(const ClassicalEnsemble& grid,
                                                           const KickSchedule& schedule,
                                                           double kappa, std::int64_t n_kicks) {
    if (grid.points.empty()) throw ParameterError("poincare_section: empty ensemble");
    if (n_kicks < 1) throw ParameterError("poincare_section: n_kicks must be >= 1");
    const auto n = static_cast<std::int64_t>(grid.points.size());
    std::vector<std::array<double, 2>> cloud(static_cast<std::size_t>(n * n_kicks));
    parallel_for_chunks(n, reduction_chunks, [&](int, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            detail::TrajState t(grid.points[static_cast<std::size_t>(i)]);
            for (std::int64_t kick = 0; kick < n_kicks; ++kick) {
                t.kick(kappa, schedule.sign(kick + 1));
                cloud[static_cast<std::size_t>(i * n_kicks + kick)] = {t.theta, t.l_wrap};
            }
        }
    });
    return cloud;
}

struct TransportResult {
    bool is_transporting = false;
    double mean_gain = 0.0;   // (L_N - L_0) / N
    double target_gain = 0.0; // ballistic gain of the nearest marginal family
};

namespace detail {

// Nearest marginal-family gain for the schedule: even multiples of pi for
// KR (accelerator modes at kappa = 2*pi*l2), odd multiples for MKR/GEN
// (kappa = (2*l2+1)*pi). Zero gain is excluded: it would classify every
// bounded orbit as transporting.
inline double ballistic_target(ScheduleKind kind, double kappa) {
    constexpr double pi = std::numbers::pi;
    if (kind == ScheduleKind::KR) {
        const double l2 = std::max(1.0, std::round(kappa / two_pi));
        return two_pi * l2;
    }
    const double l2 = std::max(0.0, std::round((kappa / pi - 1.0) / 2.0));
    return (2.0 * l2 + 1.0) * pi;
}

} // namespace detail

// Ballistic-transport detector: a trajectory is transporting when its mean
// momentum gain per kick matches the marginal-family gain within tol.
inline TransportResult transport_classify(const PhasePoint& p0, const KickSchedule& schedule,
                                          double kappa, std::int64_t n_kicks, double tol) {
    if (!(tol > 0.0)) throw ParameterError("transport_classify: tol must be > 0");
    if (n_kicks < 1) throw ParameterError("transport_classify: n_kicks must be >= 1");
    detail::TrajState t(p0);
    const double l0 = t.l_full;
    for (std::int64_t kick = 1; kick <= n_kicks; ++kick) t.kick(kappa, schedule.sign(kick));
    TransportResult r;
    r.mean_gain = (t.l_full - l0) / static_cast<double>(n_kicks);
    r.target_gain = detail::ballistic_target(schedule.kind(), kappa);
    r.is_transporting = std::abs(std::abs(r.mean_gain) - r.target_gain) < tol;
    return r;
}

inline constexpr double default_transport_tol = 0.05 * std::numbers::pi;

// Fraction of a cell-centered lattice over `cell` classified transporting.
// Sticky boundary points misclassified at small n_kicks are accepted as
// method error; 2000 kicks is the working default.
inline double island_fraction(const PhaseCell& cell, std::size_t resolution,
                              const KickSchedule& schedule, double kappa,
                              std::int64_t n_kicks = 2000, double tol = default_transport_tol) {
    if (!(cell.theta_max > cell.theta_min) || !(cell.l_max > cell.l_min))
        throw ParameterError("island_fraction: degenerate cell");
    if (resolution < 32) throw ParameterError("island_fraction: resolution must be >= 32 per axis");
    const ClassicalEnsemble grid = grid_ensemble(cell, resolution);
    const auto n = static_cast<std::int64_t>(grid.points.size());
    const std::int64_t hits = parallel_reduce_chunks<std::int64_t>(
        n, reduction_chunks,
        [&](int, std::int64_t lo, std::int64_t hi) {
            std::int64_t count = 0;
            for (std::int64_t i = lo; i < hi; ++i)
                if (transport_classify(grid.points[static_cast<std::size_t>(i)], schedule, kappa,
                                       n_kicks, tol)
                        .is_transporting)
                    ++count;
            return count;
        },
        [](std::int64_t a, std::int64_t b) { return a + b; }, std::int64_t{0});
    return static_cast<double>(hits) / static_cast<double>(n);
}

} // namespace rotor
