#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "rotor/errors.hpp"
#include "rotor/phase_point.hpp"

namespace rotor {

enum class ScheduleKind { KR, MKR, GEN };

// Sign sequence f(n) applied to the kicks. Kick indices are 1-based
// throughout this library: the first kick is n = 1 and f(n) is
// pattern[(n-1) mod period]. The MKR pattern (+,+,-,-) reverses the
// kicking potential after every two kicks; GEN blocks of 2*n_half kicks
// generalize that reversal.
class KickSchedule {
public:
    KickSchedule(ScheduleKind kind, std::vector<int> pattern, std::string label)
        : kind_(kind), pattern_(std::move(pattern)), label_(std::move(label)) {
        for (int s : pattern_)
            if (s != 1 && s != -1) throw ParameterError("kick signs must be +1 or -1");
        if (pattern_.empty()) throw ParameterError("kick pattern must be non-empty");
    }

    ScheduleKind kind() const { return kind_; }
    const std::vector<int>& pattern() const { return pattern_; }
    std::size_t period() const { return pattern_.size(); }
    const std::string& label() const { return label_; }

    // Sign of kick n (1-based).
    int sign(std::int64_t n) const {
        return pattern_[static_cast<std::size_t>((n - 1) % static_cast<std::int64_t>(pattern_.size()))];
    }

private:
    ScheduleKind kind_;
    std::vector<int> pattern_;
    std::string label_;
};

// Build a kick schedule.
//   KR        -> (+1)
//   MKR       -> (+1,+1,-1,-1)
//   GEN       -> N copies of +1 then N of -1, with block length N = 2*n_half
//                and n_half odd >= 3 (N = 6, 10, 14, ...).
inline KickSchedule make_schedule(ScheduleKind kind, std::optional<int> n_half = std::nullopt) {
    switch (kind) {
    case ScheduleKind::KR:
        return KickSchedule(kind, {1}, "KR");
    case ScheduleKind::MKR:
        return KickSchedule(kind, {1, 1, -1, -1}, "MKR");
    case ScheduleKind::GEN: {
        if (!n_half) throw ParameterError("GEN schedule requires n_half");
        if (*n_half < 3 || *n_half % 2 == 0)
            throw ParameterError("GEN n_half must be odd and >= 3");
        const int block = 2 * *n_half;
        std::vector<int> pattern(static_cast<std::size_t>(2 * block));
        for (int i = 0; i < block; ++i) {
            pattern[static_cast<std::size_t>(i)] = 1;
            pattern[static_cast<std::size_t>(block + i)] = -1;
        }
        return KickSchedule(kind, std::move(pattern), "GEN(" + std::to_string(block) + ")");
    }
    }
    throw ParameterError("unknown schedule kind");
}

struct MarginalFamily {
    double kappa = 0.0;
    std::vector<PhasePoint> points; // theta reported in [0, 2*pi)
};

// Marginally stable points of the kick maps. For KR they sit at
// (L = 2*pi*l1, theta = pi/2 or 3*pi/2) when kappa = 2*pi*l2; the
// sign-modulated map shifts the family to odd multiples:
// (L = (2*l1+1)*pi, same angles) when kappa = (2*l2+1)*pi. Trajectories
// started there gain a constant |kappa| in L per kick.
inline MarginalFamily marginal_points(ScheduleKind variant, int l1, int l2) {
    constexpr double pi = std::numbers::pi;
    MarginalFamily out;
    double l0 = 0.0;
    if (variant == ScheduleKind::KR) {
        out.kappa = 2.0 * pi * l2;
        l0 = 2.0 * pi * l1;
    } else {
        out.kappa = (2.0 * l2 + 1.0) * pi;
        l0 = (2.0 * l1 + 1.0) * pi;
    }
    out.points.push_back({l0, pi / 2.0});
    out.points.push_back({l0, 3.0 * pi / 2.0});
    return out;
}

} // namespace rotor
