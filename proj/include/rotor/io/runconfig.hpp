#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rotor/errors.hpp"
#include "rotor/numeric.hpp"
#include "rotor/params.hpp"
#include "rotor/schedule.hpp"

namespace rotor::io {

enum class RunMode { PhaseSpace, Evolve, Compare, Distribution, Sweep, Fit };

inline const char* mode_name(RunMode m) {
    switch (m) {
    case RunMode::PhaseSpace: return "phase-space";
    case RunMode::Evolve: return "evolve";
    case RunMode::Compare: return "compare";
    case RunMode::Distribution: return "distribution";
    case RunMode::Sweep: return "sweep";
    case RunMode::Fit: return "fit";
    }
    return "?";
}

// Initial-state spec: fock:m0 | gaussian:s | uniform | wigner[:s].
struct InitSpec {
    enum class Kind { Fock, Gaussian, Uniform, Wigner };
    Kind kind = Kind::Fock;
    double param = 0.0; // m0 for fock, width_sq s for gaussian/wigner

    bool quantum() const { return kind == Kind::Fock || kind == Kind::Gaussian; }

    static InitSpec parse(const std::string& text) {
        InitSpec spec;
        const auto colon = text.find(':');
        const std::string head = text.substr(0, colon);
        const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
        auto need_arg = [&](double fallback, bool required) {
            if (arg.empty()) {
                if (required) throw ParameterError("init '" + head + "' requires a parameter");
                return fallback;
            }
            try {
                std::size_t used = 0;
                const double v = std::stod(arg, &used);
                if (used != arg.size()) throw std::invalid_argument(arg);
                return v;
            } catch (const std::exception&) {
                throw ParameterError("bad init parameter '" + arg + "'");
            }
        };
        if (head == "fock") {
            spec.kind = Kind::Fock;
            spec.param = need_arg(0.0, true);
            if (spec.param != std::floor(spec.param))
                throw ParameterError("fock initial state requires an integer m0");
        } else if (head == "gaussian") {
            spec.kind = Kind::Gaussian;
            spec.param = need_arg(9.0, true);
        } else if (head == "uniform") {
            spec.kind = Kind::Uniform;
            if (!arg.empty()) throw ParameterError("init 'uniform' takes no parameter");
        } else if (head == "wigner") {
            spec.kind = Kind::Wigner;
            spec.param = need_arg(9.0, false); // defaults to the s=9 state's Wigner function
        } else {
            throw ParameterError("unknown init kind '" + head + "'");
        }
        return spec;
    }

    std::string text() const {
        switch (kind) {
        case Kind::Fock: return "fock:" + std::to_string(static_cast<long long>(param));
        case Kind::Gaussian: return "gaussian:" + std::to_string(param);
        case Kind::Uniform: return "uniform";
        case Kind::Wigner: return "wigner:" + std::to_string(param);
        }
        return "?";
    }
};

// Parse "kr", "mkr" or "genN" (N = block length, 6, 10, 14, ...).
inline KickSchedule parse_schedule(const std::string& text) {
    if (text == "kr") return make_schedule(ScheduleKind::KR);
    if (text == "mkr") return make_schedule(ScheduleKind::MKR);
    if (text.rfind("gen", 0) == 0) {
        const std::string num = text.substr(3);
        int block = 0;
        try {
            std::size_t used = 0;
            block = std::stoi(num, &used);
            if (used != num.size()) throw std::invalid_argument(num);
        } catch (const std::exception&) {
            throw ParameterError("bad schedule '" + text + "'");
        }
        if (block < 6 || block % 4 != 2)
            throw ParameterError("gen schedule block must be 6, 10, 14, ... (got " + num + ")");
        return make_schedule(ScheduleKind::GEN, block / 2);
    }
    throw ParameterError("unknown schedule '" + text + "' (expected kr, mkr or genN)");
}

// Fully resolved run configuration. Validation happens before any compute.
struct RunConfig {
    RunMode mode = RunMode::Compare;

    // Sweepable axes; non-sweep modes require exactly one entry each.
    std::vector<double> kappas;
    std::vector<double> taus;
    std::vector<std::string> schedules;
    bool kappa_from_k = false; // kappa values were given as k (kappa = k*tau)

    std::int64_t kicks = 0;
    std::optional<std::int64_t> basis; // half-size B; absent = auto-size
    std::int64_t ensemble = 100000;
    std::uint64_t seed = 1;
    int boundary_mult = 1;
    InitSpec init;
    std::filesystem::path out_dir;
    std::optional<std::pair<std::int64_t, std::int64_t>> fit_window;
    double break_threshold = 0.2;
    std::int64_t break_sustained = 10;
    bool plots = true;
    std::string input_file; // fit mode

    SimParams params_at(std::size_t kappa_idx, std::size_t tau_idx) const {
        const double tau = taus.at(tau_idx);
        if (kappa_from_k) return SimParams::from_k(kappas.at(kappa_idx), tau, boundary_mult);
        return SimParams::from_kappa(kappas.at(kappa_idx), tau, boundary_mult);
    }
};

// Per-sector basis auto-sizing: the transporting islands shift momentum by
// about pi per kick, so the ballistic front after N kicks sits near
// p = pi N / tau. Twice that, rounded up to a power of two, keeps the
// edge-occupancy guard comfortably clear for every schedule.
inline std::int64_t auto_basis(std::int64_t kicks, double tau, int boundary_mult) {
    const double front = std::numbers::pi * static_cast<double>(kicks) / tau;
    std::int64_t per_sector = 1024;
    while (static_cast<double>(per_sector) < 2.0 * front && per_sector < (std::int64_t{1} << 40))
        per_sector <<= 1;
    return per_sector * boundary_mult;
}

} // namespace rotor::io
