#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "rotor/energy_series.hpp"
#include "rotor/errors.hpp"
#include "rotor/numeric.hpp"
#include "rotor/parallel.hpp"
#include "rotor/params.hpp"
#include "rotor/schedule.hpp"

namespace rotor {

namespace detail {

// FFTW's planner is not thread-safe; plan creation/destruction serializes
// through this lock. Plan execution on distinct arrays is safe.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// FFTW-aligned complex storage (usable directly by in-place transforms).
class ComplexBuffer {
public:
    ComplexBuffer() = default;
    explicit ComplexBuffer(std::size_t n) : size_(n) {
        fftw_complex* raw = fftw_alloc_complex(n);
        if (!raw) throw std::bad_alloc();
        std::memset(raw, 0, n * sizeof(fftw_complex));
        data_ = reinterpret_cast<std::complex<double>*>(raw);
    }
    ComplexBuffer(const ComplexBuffer& other) : ComplexBuffer(other.size_) {
        if (size_) std::memcpy(data_, other.data_, size_ * sizeof(std::complex<double>));
    }
    ComplexBuffer& operator=(const ComplexBuffer& other) {
        if (this != &other) {
            ComplexBuffer tmp(other);
            swap(tmp);
        }
        return *this;
    }
    ComplexBuffer(ComplexBuffer&& other) noexcept { swap(other); }
    ComplexBuffer& operator=(ComplexBuffer&& other) noexcept {
        swap(other);
        return *this;
    }
    ~ComplexBuffer() {
        if (data_) fftw_free(data_);
    }

    void swap(ComplexBuffer& other) noexcept {
        std::swap(data_, other.data_);
        std::swap(size_, other.size_);
    }

    std::complex<double>* data() { return data_; }
    const std::complex<double>* data() const { return data_; }
    std::complex<double>& operator[](std::size_t i) { return data_[i]; }
    const std::complex<double>& operator[](std::size_t i) const { return data_[i]; }
    std::size_t size() const { return size_; }

private:
    std::complex<double>* data_ = nullptr;
    std::size_t size_ = 0;
};

} // namespace detail

// Wave function on the (quasi-)momentum ladder m in [-B, B-1]; the physical
// momentum of index m is m/M, so M = 1 is the ordinary 2*pi-periodic rotor
// and M = 256 realizes a 512*pi spatial period.
//
// The kick potential cos(theta) has period 2*pi, so it couples only indices
// at distance M: the ladder splits into M independent quasi-momentum
// sectors, each an integer ladder j in [-B/M, B/M-1] with offset r/M.
// Amplitudes are stored sector-major, each sector in DFT slot order, so each
// sector transforms in place. Use amplitude(m) / storage_index(m) for
// logical access.
class QuantumState {
public:
    QuantumState(std::int64_t half_size, int boundary_multiplier, double tau)
        : b_(half_size), m_(boundary_multiplier), tau_(tau) {
        if (b_ < 2) throw ParameterError("QuantumState: basis half-size must be >= 2");
        if (m_ < 1) throw ParameterError("QuantumState: boundary multiplier must be >= 1");
        if (b_ % m_ != 0)
            throw ParameterError("QuantumState: basis half-size must be a multiple of the boundary multiplier");
        if (!(tau_ > 0.0)) throw ParameterError("QuantumState: tau must be > 0");
        amps_ = detail::ComplexBuffer(static_cast<std::size_t>(2 * b_));
    }

    std::int64_t half_size() const { return b_; }
    std::int64_t size() const { return 2 * b_; }
    int boundary_multiplier() const { return m_; }
    double tau() const { return tau_; }

    std::int64_t sector_size() const { return 2 * b_ / m_; }
    int sectors() const { return m_; }

    // Physical momentum of ladder index m.
    double momentum_of(std::int64_t m) const { return static_cast<double>(m) / m_; }

    std::size_t storage_index(std::int64_t m) const {
        const std::int64_t ns = sector_size();
        const std::int64_t r = ((m % m_) + m_) % m_;
        const std::int64_t j = (m - r) / m_;
        const std::int64_t slot = j >= 0 ? j : j + ns;
        return static_cast<std::size_t>(r * ns + slot);
    }

    std::int64_t m_of_storage(std::size_t idx) const {
        const std::int64_t ns = sector_size();
        const std::int64_t r = static_cast<std::int64_t>(idx) / ns;
        const std::int64_t slot = static_cast<std::int64_t>(idx) % ns;
        const std::int64_t j = slot < ns / 2 ? slot : slot - ns;
        return m_ * j + r;
    }

    std::complex<double> amplitude(std::int64_t m) const { return amps_[storage_index(m)]; }
    void set_amplitude(std::int64_t m, std::complex<double> v) { amps_[storage_index(m)] = v; }

    std::complex<double>* storage() { return amps_.data(); }
    const std::complex<double>* storage() const { return amps_.data(); }

    bool same_grid(const QuantumState& other) const {
        return b_ == other.b_ && m_ == other.m_ && tau_ == other.tau_;
    }

private:
    std::int64_t b_;
    int m_;
    double tau_;
    detail::ComplexBuffer amps_;
};

struct StateStats {
    double norm = 0.0;      // sum |C_m|^2
    double edge_prob = 0.0; // probability in the outermost 1% of indices
    double energy = 0.0;    // sum |C_m|^2 (tau m / M)^2 / 2
};

inline constexpr double norm_tolerance = 1e-10;
inline constexpr double edge_tolerance = 1e-12;

// One pass over the state: norm, edge-band occupancy and scaled energy.
inline StateStats compute_stats(const QuantumState& psi) {
    const std::int64_t n = psi.size();
    const std::int64_t band = std::max<std::int64_t>(1, n / 200); // 1% total, both edges
    const std::int64_t edge_lo = -psi.half_size() + band;         // m < edge_lo is edge
    const std::int64_t edge_hi = psi.half_size() - 1 - band;      // m > edge_hi is edge
    const double tau = psi.tau();
    const int m_mult = psi.boundary_multiplier();
    const std::int64_t ns = psi.sector_size();
    const auto* a = psi.storage();

    struct Acc {
        KahanSum norm, edge, energy;
    };
    Acc total = parallel_reduce_chunks<Acc>(
        n, reduction_chunks,
        [&](int, std::int64_t lo, std::int64_t hi) {
            Acc s;
            // Track (sector, slot) incrementally; a div/mod per element
            // would rival the FFT cost at these sizes.
            std::int64_t r = lo / ns;
            std::int64_t slot = lo % ns;
            for (std::int64_t i = lo; i < hi; ++i) {
                const double p2 = std::norm(a[i]);
                const std::int64_t j = slot < ns / 2 ? slot : slot - ns;
                const std::int64_t m = m_mult * j + r;
                const double l = tau * static_cast<double>(m) / m_mult;
                s.norm.add(p2);
                s.energy.add(p2 * l * l);
                if (m < edge_lo || m > edge_hi) s.edge.add(p2);
                if (++slot == ns) {
                    slot = 0;
                    ++r;
                }
            }
            return s;
        },
        [](Acc x, const Acc& y) {
            x.norm.merge(y.norm);
            x.edge.merge(y.edge);
            x.energy.merge(y.energy);
            return x;
        },
        Acc{});
    return {total.norm.value(), total.edge.value(), total.energy.value() / 2.0};
}

inline double state_norm(const QuantumState& psi) { return compute_stats(psi).norm; }

// Dimensionless scaled rotational energy sum P(m) (tau m / M)^2 / 2.
inline double quantum_energy(const QuantumState& psi) { return compute_stats(psi).energy; }

// Occupation probabilities P(m) = |C_m|^2 on the flat ladder.
struct MomentumDistribution {
    std::vector<double> prob; // index i corresponds to m = i - half_size
    std::int64_t half_size = 0;
    int boundary_multiplier = 1;

    double at(std::int64_t m) const { return prob[static_cast<std::size_t>(m + half_size)]; }
    std::int64_t min_m() const { return -half_size; }
    std::int64_t max_m() const { return half_size - 1; }
};

inline MomentumDistribution momentum_distribution(const QuantumState& psi) {
    MomentumDistribution d;
    d.half_size = psi.half_size();
    d.boundary_multiplier = psi.boundary_multiplier();
    d.prob.resize(static_cast<std::size_t>(psi.size()));
    const auto* a = psi.storage();
    const std::int64_t n = psi.size();
    const std::int64_t ns = psi.sector_size();
    const std::int64_t mult = psi.boundary_multiplier();
    parallel_for_chunks(n, reduction_chunks, [&](int, std::int64_t lo, std::int64_t hi) {
        std::int64_t r = lo / ns;
        std::int64_t slot = lo % ns;
        for (std::int64_t i = lo; i < hi; ++i) {
            const std::int64_t j = slot < ns / 2 ? slot : slot - ns;
            d.prob[static_cast<std::size_t>(mult * j + r + psi.half_size())] = std::norm(a[i]);
            if (++slot == ns) {
                slot = 0;
                ++r;
            }
        }
    });
    return d;
}

// Momentum eigenstate |m0>; the stored index is m0*M because a Fock state
// carries integer physical momentum.
inline QuantumState init_fock(std::int64_t m0, std::int64_t half_size, int boundary_multiplier,
                              double tau) {
    QuantumState psi(half_size, boundary_multiplier, tau);
    const std::int64_t idx = m0 * boundary_multiplier;
    if (idx < -half_size || idx >= half_size)
        throw ParameterError("init_fock: m0 outside the momentum grid");
    psi.set_amplitude(idx, {1.0, 0.0});
    return psi;
}

// Gaussian wave packet psi(theta) ~ exp(-theta^2 / (2 s)) centered at
// theta = 0 on the domain [-pi M, pi M); width_sq is s (the paper's state
// exp(-theta^2/18) is s = 9). Amplitudes are the momentum-representation
// coefficients C_m ~ exp(-s p_m^2 / 2), normalized so sum |C_m|^2 = 1.
inline QuantumState init_gaussian(double width_sq, std::int64_t half_size, int boundary_multiplier,
                                  double tau) {
    if (!(width_sq > 0.0)) throw ParameterError("init_gaussian: width_sq must be > 0");
    QuantumState psi(half_size, boundary_multiplier, tau);

    // Spatial wrap-around leakage beyond the periodic boundary.
    const double boundary = std::numbers::pi * boundary_multiplier;
    const double leak = std::erfc(boundary / std::sqrt(width_sq));
    if (!(leak < 1e-12))
        throw ParameterError("init_gaussian: Gaussian tail at the spatial boundary is " +
                             std::to_string(leak) + " (must be < 1e-12); increase the boundary multiplier");

    KahanSum norm2;
    for (std::int64_t m = -half_size; m < half_size; ++m) {
        const double p = psi.momentum_of(m);
        const double c = std::exp(-0.5 * width_sq * p * p);
        psi.set_amplitude(m, {c, 0.0});
        norm2.add(c * c);
    }
    const double inv = 1.0 / std::sqrt(norm2.value());
    auto* a = psi.storage();
    for (std::int64_t i = 0; i < psi.size(); ++i) a[i] *= inv;

    const StateStats st = compute_stats(psi);
    if (st.edge_prob > edge_tolerance)
        throw ParameterError("init_gaussian: momentum tail reaches the grid edge (leakage " +
                             std::to_string(st.edge_prob) + "); increase the basis size");
    return psi;
}

// Split-operator Floquet propagator on the momentum ladder.
//
// One kick period applies exp(-i sign k cos(theta)) pointwise on the
// spatial grid (via FFT to the angle representation and back) followed by
// the free phase exp(-i tau (m/M)^2 / 2) — the kick-then-free ordering of
// the one-period propagator. Each quasi-momentum sector transforms
// independently and in place.
//
// Guards: norm drift beyond 1e-10 or edge-band occupancy beyond 1e-12
// aborts the run (NormDriftError / TruncationError). There is no silent
// renormalization: drift signals truncation or grid error, not physics.
class Propagator {
public:
    Propagator(const SimParams& params, std::int64_t half_size)
        : k_(params.k()),
          tau_(params.tau()),
          mult_(params.boundary_multiplier()),
          b_(half_size),
          n_(2 * half_size),
          ns_(2 * half_size / params.boundary_multiplier()) {
        if (b_ < 2) throw ParameterError("Propagator: basis half-size must be >= 2");
        if (b_ % mult_ != 0)
            throw ParameterError("Propagator: basis half-size must be a multiple of the boundary multiplier");

        build_tables();

        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        scratch_ = detail::ComplexBuffer(static_cast<std::size_t>(ns_));
        auto* s = reinterpret_cast<fftw_complex*>(scratch_.data());
        const int ns_int = static_cast<int>(ns_);
        plan_to_theta_ = fftw_plan_dft_1d(ns_int, s, s, FFTW_BACKWARD, FFTW_ESTIMATE);
        plan_to_momentum_ = fftw_plan_dft_1d(ns_int, s, s, FFTW_FORWARD, FFTW_ESTIMATE);
        if (!plan_to_theta_ || !plan_to_momentum_) throw NumericError("Propagator: FFTW planning failed");
    }

    Propagator(const Propagator&) = delete;
    Propagator& operator=(const Propagator&) = delete;

    ~Propagator() {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        if (plan_to_theta_) fftw_destroy_plan(plan_to_theta_);
        if (plan_to_momentum_) fftw_destroy_plan(plan_to_momentum_);
    }

    double k() const { return k_; }
    double tau() const { return tau_; }
    int boundary_multiplier() const { return mult_; }
    std::int64_t half_size() const { return b_; }

    // One kick period F(tau, sign*k).
    void kr_step(QuantumState& psi, int sign) const {
        if (sign != 1 && sign != -1) throw ParameterError("kr_step: sign must be +1 or -1");
        check_grid(psi);
        apply_kick_and_free(psi, sign);
        enforce_guards(compute_stats(psi));
    }

    // One MKR cycle [F(tau,-k)]^2 [F(tau,k)]^2, i.e. kick signs (+,+,-,-)
    // over four kick periods.
    void mkr_cycle(QuantumState& psi) const {
        kr_step(psi, +1);
        kr_step(psi, +1);
        kr_step(psi, -1);
        kr_step(psi, -1);
    }

    // Time-delay realization [Pi F(tau,k) F(tau,k)]^2 where Pi multiplies
    // index m by exp(-i pi (m/M)^2). On the integer ladder (M = 1) Pi is
    // the parity phase (-1)^m and the cycle equals mkr_cycle exactly as an
    // operator identity; off the integer ladder the two differ.
    void delay_cycle(QuantumState& psi) const {
        kr_step(psi, +1);
        kr_step(psi, +1);
        apply_delay_phase(psi);
        kr_step(psi, +1);
        kr_step(psi, +1);
        apply_delay_phase(psi);
    }

    struct EvolveReport {
        double max_norm_drift = 0.0; // max |norm - 1| seen after any kick
        double max_edge_prob = 0.0;
    };

    // Advance n_kicks kicks with the schedule's signs, recording the scaled
    // energy after every kick; values[0] is the initial-state energy.
    EnergySeries evolve(QuantumState& psi, const KickSchedule& schedule, std::int64_t n_kicks,
                        EvolveReport* report = nullptr) const {
        if (n_kicks < 1) throw ParameterError("evolve: n_kicks must be >= 1");
        check_grid(psi);
        EnergySeries series;
        series.kind = EnsembleKind::Quantum;
        series.values.resize(static_cast<std::size_t>(n_kicks) + 1);

        StateStats st = compute_stats(psi);
        enforce_guards(st);
        series.values[0] = st.energy;
        for (std::int64_t kick = 1; kick <= n_kicks; ++kick) {
            apply_kick_and_free(psi, schedule.sign(kick));
            st = compute_stats(psi);
            enforce_guards(st);
            if (report) {
                report->max_norm_drift = std::max(report->max_norm_drift, std::abs(st.norm - 1.0));
                report->max_edge_prob = std::max(report->max_edge_prob, st.edge_prob);
            }
            series.values[static_cast<std::size_t>(kick)] = st.energy;
        }
        return series;
    }

private:
    void check_grid(const QuantumState& psi) const {
        if (psi.half_size() != b_ || psi.boundary_multiplier() != mult_ || psi.tau() != tau_)
            throw ParameterError("Propagator: state grid does not match the propagator");
    }

    void build_tables() {
        kick_plus_.resize(static_cast<std::size_t>(ns_));
        kick_minus_.resize(static_cast<std::size_t>(ns_));
        for (std::int64_t g = 0; g < ns_; ++g) {
            const double phase = -k_ * std::cos(two_pi * static_cast<double>(g) / static_cast<double>(ns_));
            kick_plus_[static_cast<std::size_t>(g)] = std::polar(1.0, phase);
            kick_minus_[static_cast<std::size_t>(g)] = std::conj(kick_plus_[static_cast<std::size_t>(g)]);
        }

        // Free phase in storage order with the inverse-FFT scale folded in.
        free_scaled_.resize(static_cast<std::size_t>(n_));
        const double inv_ns = 1.0 / static_cast<double>(ns_);
        parallel_for_chunks(n_, reduction_chunks, [&](int, std::int64_t lo, std::int64_t hi) {
            std::int64_t r = lo / ns_;
            std::int64_t slot = lo % ns_;
            for (std::int64_t i = lo; i < hi; ++i) {
                const std::int64_t j = slot < ns_ / 2 ? slot : slot - ns_;
                const double p = static_cast<double>(mult_ * j + r) / static_cast<double>(mult_);
                free_scaled_[static_cast<std::size_t>(i)] = std::polar(inv_ns, -0.5 * tau_ * p * p);
                if (++slot == ns_) {
                    slot = 0;
                    ++r;
                }
            }
        });
    }

    void build_delay_table() const {
        if (!delay_.empty()) return;
        delay_.resize(static_cast<std::size_t>(n_));
        const std::int64_t mod = 2 * static_cast<std::int64_t>(mult_) * mult_;
        for (std::int64_t i = 0; i < n_; ++i) {
            const std::int64_t r = i / ns_;
            const std::int64_t slot = i % ns_;
            const std::int64_t j = slot < ns_ / 2 ? slot : slot - ns_;
            const std::int64_t m = mult_ * j + r;
            if (mult_ == 1) {
                // exp(-i pi m^2) = (-1)^m exactly on the integer ladder.
                delay_[static_cast<std::size_t>(i)] = (m % 2 == 0) ? 1.0 : -1.0;
            } else {
                // Reduce m^2 mod 2 M^2 in integers so the phase argument
                // stays small and exact.
                const std::int64_t red = ((m * m) % mod + mod) % mod;
                const double arg = -std::numbers::pi * static_cast<double>(red) /
                                   (static_cast<double>(mult_) * mult_);
                delay_[static_cast<std::size_t>(i)] = std::polar(1.0, arg);
            }
        }
    }

    void apply_delay_phase(QuantumState& psi) const {
        {
            std::lock_guard<std::mutex> lock(delay_mutex_);
            build_delay_table();
        }
        auto* a = psi.storage();
        parallel_for_chunks(n_, reduction_chunks, [&](int, std::int64_t lo, std::int64_t hi) {
            for (std::int64_t i = lo; i < hi; ++i) a[i] *= delay_[static_cast<std::size_t>(i)];
        });
    }

    void apply_kick_and_free(QuantumState& psi, int sign) const {
        const auto& kick = sign > 0 ? kick_plus_ : kick_minus_;
        auto* base = psi.storage();
        const int workers = static_cast<int>(std::min<std::int64_t>(thread_count(), mult_));
        parallel_for_chunks(mult_, workers, [&](int, std::int64_t r_lo, std::int64_t r_hi) {
            for (std::int64_t r = r_lo; r < r_hi; ++r) {
                auto* block = reinterpret_cast<fftw_complex*>(base + r * ns_);
                fftw_execute_dft(plan_to_theta_, block, block);
                auto* cblock = base + r * ns_;
                for (std::int64_t g = 0; g < ns_; ++g) cblock[g] *= kick[static_cast<std::size_t>(g)];
                fftw_execute_dft(plan_to_momentum_, block, block);
                const auto* fs = free_scaled_.data() + r * ns_;
                for (std::int64_t s = 0; s < ns_; ++s) cblock[s] *= fs[s];
            }
        });
    }

    static void enforce_guards(const StateStats& st) {
        if (std::abs(st.norm - 1.0) > norm_tolerance)
            throw NormDriftError("norm drifted to " + std::to_string(st.norm) +
                                 " (tolerance 1e-10); basis or grid error");
        if (st.edge_prob > edge_tolerance)
            throw TruncationError("edge-band occupancy " + std::to_string(st.edge_prob) +
                                  " exceeds 1e-12; momentum truncation violated");
    }

    double k_;
    double tau_;
    int mult_;
    std::int64_t b_;
    std::int64_t n_;
    std::int64_t ns_;

    std::vector<std::complex<double>> kick_plus_;
    std::vector<std::complex<double>> kick_minus_;
    std::vector<std::complex<double>> free_scaled_;
    mutable std::vector<std::complex<double>> delay_;
    mutable std::mutex delay_mutex_;

    detail::ComplexBuffer scratch_;
    fftw_plan plan_to_theta_ = nullptr;
    fftw_plan plan_to_momentum_ = nullptr;
};

} // namespace rotor
