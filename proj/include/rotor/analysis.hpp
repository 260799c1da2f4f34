#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "rotor/energy_series.hpp"
#include "rotor/errors.hpp"
#include "rotor/quantum.hpp"

namespace rotor {

// Power-law fit log10(E) = a*log10(N) + b over a kick window.
struct FitResult {
    double a = 0.0;  // exponent
    double b = 0.0;  // intercept, base-10
    std::int64_t n_lo = 0;
    std::int64_t n_hi = 0;
    double r2 = 0.0; // coefficient of determination
};

// Ordinary least squares on (log10 N, log10 E) over kicks N in
// [n_lo, n_hi] inclusive. The fit is unweighted in log space.
inline FitResult loglog_fit(const EnergySeries& series, std::int64_t n_lo, std::int64_t n_hi) {
    if (n_lo < 1 || n_hi <= n_lo) throw ParameterError("loglog_fit: window must satisfy 1 <= N_lo < N_hi");
    if (n_hi > series.last_kick()) throw ParameterError("loglog_fit: window exceeds the series");
    const std::int64_t count = n_hi - n_lo + 1;
    if (count < 10) throw ParameterError("loglog_fit: window must contain at least 10 points");

    double sx = 0.0, sy = 0.0;
    for (std::int64_t n = n_lo; n <= n_hi; ++n) {
        const double e = series.values[static_cast<std::size_t>(n)];
        if (!(e > 0.0)) throw std::domain_error("loglog_fit: nonpositive energy inside the window");
        sx += std::log10(static_cast<double>(n));
        sy += std::log10(e);
    }
    const double mx = sx / static_cast<double>(count);
    const double my = sy / static_cast<double>(count);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::int64_t n = n_lo; n <= n_hi; ++n) {
        const double x = std::log10(static_cast<double>(n)) - mx;
        const double y = std::log10(series.values[static_cast<std::size_t>(n)]) - my;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    FitResult fit;
    fit.n_lo = n_lo;
    fit.n_hi = n_hi;
    fit.a = sxy / sxx;
    fit.b = my - fit.a * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

struct BreakTime {
    bool found = false;
    std::int64_t t_b = 0;
    double threshold = 0.0;
    std::int64_t sustained = 0;
};

// Smallest kick N at which the relative deviation
// |E_q - E_c| / max(E_c, eps), averaged over the `sustained` kicks
// starting at N, exceeds `threshold`. eps guards the zero-energy start.
//
// `sustained` is a debounce window: quantum energies fluctuate a few
// percent around their trend, and demanding every single kick of a run to
// clear the threshold would push the detected break time well past the
// visible divergence of the curves. The windowed mean fires where the
// curves have durably separated. The paper reports break times by
// inspection only; this fixed criterion is this artifact's operational
// definition.
inline BreakTime break_time(const EnergySeries& quantum, const EnergySeries& classical,
                            double threshold = 0.2, std::int64_t sustained = 10) {
    if (quantum.values.size() != classical.values.size())
        throw ParameterError("break_time: series lengths differ");
    if (!(threshold > 0.0)) throw ParameterError("break_time: threshold must be > 0");
    if (sustained < 1) throw ParameterError("break_time: sustained must be >= 1");

    constexpr double eps = 1e-12;
    BreakTime out;
    out.threshold = threshold;
    out.sustained = sustained;

    const auto size = static_cast<std::int64_t>(quantum.values.size());
    if (size < sustained) return out;

    auto rel = [&](std::int64_t n) {
        const double eq = quantum.values[static_cast<std::size_t>(n)];
        const double ec = classical.values[static_cast<std::size_t>(n)];
        return std::abs(eq - ec) / std::max(ec, eps);
    };

    double window = 0.0;
    for (std::int64_t n = 0; n < sustained; ++n) window += rel(n);
    for (std::int64_t n = 0;; ++n) {
        if (window / static_cast<double>(sustained) > threshold) {
            out.found = true;
            out.t_b = n;
            return out;
        }
        if (n + sustained >= size) return out;
        window += rel(n + sustained) - rel(n);
    }
}

struct RatioStats {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double geometric_mean = 0.0;
    std::int64_t counted = 0;  // bins entering the statistics
    std::int64_t excluded = 0; // bins skipped because p2 was below the floor
};

// Ratios p1(m)/p2(m) over the band m_lo <= |m| <= m_hi. Bins where p2 is
// below the 1e-300 numeric floor are excluded and counted.
inline RatioStats distribution_ratio(const MomentumDistribution& p1, const MomentumDistribution& p2,
                                     std::int64_t m_lo, std::int64_t m_hi) {
    if (p1.half_size != p2.half_size || p1.boundary_multiplier != p2.boundary_multiplier)
        throw ParameterError("distribution_ratio: distributions live on different grids");
    if (m_lo < 0 || m_hi < m_lo) throw ParameterError("distribution_ratio: bad band");
    if (m_hi >= p1.half_size) throw ParameterError("distribution_ratio: band exceeds the grid");

    constexpr double floor = 1e-300;
    RatioStats out;
    double min_log = std::numeric_limits<double>::infinity();
    double max_log = -std::numeric_limits<double>::infinity();
    double sum_log = 0.0;

    auto visit = [&](std::int64_t m) {
        const double denom = p2.at(m);
        if (denom < floor) {
            ++out.excluded;
            return;
        }
        // log-space keeps ratios ~1e20+ and numerators near the numeric
        // floor well-behaved; a zero numerator maps to -inf (ratio 0).
        const double num = p1.at(m);
        const double lg = num > 0.0 ? std::log(num) - std::log(denom)
                                    : -std::numeric_limits<double>::infinity();
        min_log = std::min(min_log, lg);
        max_log = std::max(max_log, lg);
        sum_log += lg;
        ++out.counted;
    };

    for (std::int64_t m = m_lo; m <= m_hi; ++m) {
        visit(m);
        if (m != 0) visit(-m);
    }
    if (out.counted == 0)
        throw std::domain_error("distribution_ratio: every bin in the band fell below the floor");
    out.min_ratio = std::exp(min_log);
    out.max_ratio = std::exp(max_log);
    out.geometric_mean = std::exp(sum_log / static_cast<double>(out.counted));
    return out;
}

// q1[at] / q2[at].
inline double energy_ratio(const EnergySeries& q1, const EnergySeries& q2, std::int64_t at) {
    if (at < 0 || at > q1.last_kick() || at > q2.last_kick())
        throw ParameterError("energy_ratio: kick index outside the series");
    const double denom = q2.values[static_cast<std::size_t>(at)];
    if (std::abs(denom) < 1e-300) throw std::domain_error("energy_ratio: zero denominator");
    return q1.values[static_cast<std::size_t>(at)] / denom;
}

} // namespace rotor
