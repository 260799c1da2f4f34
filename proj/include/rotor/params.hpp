#pragma once

#include <cmath>
#include <string>

#include "rotor/errors.hpp"

namespace rotor {

// Dimensionless parameter set shared by the classical and quantum maps.
//
// kappa is the classical stochasticity parameter, tau the effective Planck
// constant, and k = kappa/tau the quantum kick strength. The physical
// constants (field strength, kick period, moment of inertia, hbar) are
// absorbed into these three numbers and never appear separately.
//
// Immutable value type; safe to copy across threads.
class SimParams {
public:
    static SimParams from_kappa(double kappa, double tau, int boundary_multiplier = 1) {
        validate_positive(kappa, "kappa");
        validate_positive(tau, "tau");
        return SimParams(kappa, tau, kappa / tau, boundary_multiplier);
    }

    static SimParams from_k(double k, double tau, int boundary_multiplier = 1) {
        validate_positive(k, "k");
        validate_positive(tau, "tau");
        return SimParams(k * tau, tau, k, boundary_multiplier);
    }

    double kappa() const { return kappa_; }
    double tau() const { return tau_; }
    double k() const { return k_; }
    int boundary_multiplier() const { return boundary_multiplier_; }

    // kappa == k * tau to 1e-12 relative, by construction.
    bool consistent() const {
        return std::abs(k_ * tau_ - kappa_) <= 1e-12 * std::abs(kappa_);
    }

private:
    SimParams(double kappa, double tau, double k, int m)
        : kappa_(kappa), tau_(tau), k_(k), boundary_multiplier_(m) {
        if (m < 1) throw ParameterError("boundary multiplier must be a positive integer");
    }

    static void validate_positive(double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ParameterError(std::string(name) + " must be positive and finite");
    }

    double kappa_;
    double tau_;
    double k_;
    int boundary_multiplier_;
};

} // namespace rotor
