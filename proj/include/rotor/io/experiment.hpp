#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rotor/analysis.hpp"
#include "rotor/classical.hpp"
#include "rotor/io/csv.hpp"
#include "rotor/io/manifest.hpp"
#include "rotor/io/runconfig.hpp"
#include "rotor/io/svg.hpp"
#include "rotor/quantum.hpp"

namespace rotor::io {

namespace detail {

inline ordered_json config_json(const RunConfig& cfg) {
    ordered_json j;
    j["mode"] = mode_name(cfg.mode);
    j[cfg.kappa_from_k ? "k" : "kappa"] = cfg.kappas;
    j["tau"] = cfg.taus;
    j["schedule"] = cfg.schedules;
    j["kicks"] = cfg.kicks;
    if (cfg.basis)
        j["basis"] = *cfg.basis;
    else if (cfg.mode != RunMode::Fit && cfg.mode != RunMode::PhaseSpace && cfg.init.quantum())
        j["basis_auto"] = auto_basis(cfg.kicks, cfg.taus.empty() ? 0.1 : cfg.taus.front(), cfg.boundary_mult);
    j["ensemble"] = cfg.ensemble;
    j["seed"] = cfg.seed;
    j["boundary_mult"] = cfg.boundary_mult;
    j["init"] = cfg.init.text();
    if (cfg.fit_window) j["fit_window"] = {cfg.fit_window->first, cfg.fit_window->second};
    j["break_threshold"] = cfg.break_threshold;
    j["break_sustained"] = cfg.break_sustained;
    j["plots"] = cfg.plots;
    if (!cfg.input_file.empty()) j["input"] = cfg.input_file;
    return j;
}

inline ordered_json fit_json(const FitResult& fit) {
    return ordered_json{{"a", fit.a}, {"b", fit.b}, {"window", {fit.n_lo, fit.n_hi}}, {"r2", fit.r2}};
}

inline ordered_json break_json(const BreakTime& bt) {
    ordered_json j{{"found", bt.found}, {"threshold", bt.threshold}, {"sustained", bt.sustained}};
    if (bt.found) j["t_b"] = bt.t_b;
    return j;
}

struct QuantumArm {
    EnergySeries series;
    MomentumDistribution dist;
    std::int64_t basis = 0;
};

inline QuantumArm run_quantum_arm(const SimParams& params, const KickSchedule& schedule,
                                  const RunConfig& cfg) {
    const std::int64_t basis =
        cfg.basis ? *cfg.basis : auto_basis(cfg.kicks, params.tau(), params.boundary_multiplier());
    QuantumState psi =
        cfg.init.kind == InitSpec::Kind::Fock
            ? init_fock(static_cast<std::int64_t>(cfg.init.param), basis,
                        params.boundary_multiplier(), params.tau())
            : init_gaussian(cfg.init.param, basis, params.boundary_multiplier(), params.tau());
    Propagator prop(params, basis);
    QuantumArm arm;
    arm.basis = basis;
    arm.series = prop.evolve(psi, schedule, cfg.kicks);
    arm.dist = momentum_distribution(psi);
    return arm;
}

inline ClassicalEnsemble make_classical_ensemble(const SimParams& params, const RunConfig& cfg) {
    // The classical twin of a quantum initial state: a Fock state |m0>
    // maps to the L = m0*tau line with uniform angles, a Gaussian to its
    // Wigner function.
    switch (cfg.init.kind) {
    case InitSpec::Kind::Uniform:
        return uniform_theta_ensemble(static_cast<std::size_t>(cfg.ensemble));
    case InitSpec::Kind::Fock: {
        auto e = uniform_theta_ensemble(static_cast<std::size_t>(cfg.ensemble));
        const double l0 = cfg.init.param * params.tau();
        for (auto& p : e.points) p.l_tilde = l0;
        return e;
    }
    case InitSpec::Kind::Gaussian:
    case InitSpec::Kind::Wigner: {
        const double sigma_theta = std::sqrt(cfg.init.param / 2.0);
        return sample_wigner_gaussian(sigma_theta, params.tau(), static_cast<std::size_t>(cfg.ensemble),
                                      cfg.seed);
    }
    }
    throw ParameterError("unknown init kind");
}

inline EnergySeries run_classical_arm(const SimParams& params, const KickSchedule& schedule,
                                      const RunConfig& cfg) {
    auto ensemble = make_classical_ensemble(params, cfg);
    return evolve_ensemble(ensemble, schedule, params.kappa(), cfg.kicks).second;
}

inline std::vector<std::array<double, 2>> series_points(const EnergySeries& s) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(s.values.size());
    for (std::size_t n = 1; n < s.values.size(); ++n)
        pts.push_back({static_cast<double>(n), s.values[n]});
    return pts;
}

inline void plot_energy(const std::filesystem::path& dir, const EnergySeries* quantum,
                        const EnergySeries* classical, Manifest& manifest) {
    SvgPlot plot("scaled energy vs kicks", "N (kicks)", "E", true, true);
    if (quantum) plot.add_line(series_points(*quantum), "#c62828", "quantum");
    if (classical) plot.add_line(series_points(*classical), "#1565c0", "classical");
    plot.write(dir / "energy.svg");
    manifest.add_output("energy.svg");
}

inline void plot_distribution(const std::filesystem::path& dir, const MomentumDistribution& dist,
                              Manifest& manifest) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(dist.prob.size());
    for (std::int64_t m = dist.min_m(); m <= dist.max_m(); ++m)
        pts.push_back({static_cast<double>(m), dist.at(m)});
    SvgPlot plot("momentum distribution", "m", "P(m)", false, true);
    plot.set_y_floor(1e-30); // match the resolvable probability floor
    plot.add_line(pts, "#c62828", "");
    plot.write(dir / "distribution.svg");
    manifest.add_output("distribution.svg");
}

inline void plot_section(const std::filesystem::path& dir,
                         const std::vector<std::array<double, 2>>& cloud, Manifest& manifest) {
    SvgPlot plot("Poincare section", "theta mod 2pi", "L mod 2pi", false, false);
    plot.add_scatter(cloud, "#263238", "");
    plot.write(dir / "section.svg");
    manifest.add_output("section.svg");
}

template <class Fn>
void best_effort_plot(const RunConfig& cfg, Fn&& fn) {
    if (!cfg.plots) return;
    try {
        fn();
    } catch (const std::exception&) {
        // plotting never gates data emission
    }
}

inline void run_phase_space(const RunConfig& cfg, const SimParams& params,
                            const KickSchedule& schedule, Manifest& manifest) {
    const auto per_axis = static_cast<std::size_t>(
        std::max(2.0, std::round(std::sqrt(static_cast<double>(cfg.ensemble)))));
    auto grid = grid_ensemble(PhaseCell{}, per_axis);
    auto cloud = poincare_section(grid, schedule, params.kappa(), cfg.kicks);
    write_section_csv(manifest.dir() / "section.csv", cloud);
    manifest.add_output("section.csv");
    best_effort_plot(cfg, [&] { plot_section(manifest.dir(), cloud, manifest); });
}

inline void run_evolve(const RunConfig& cfg, const SimParams& params, const KickSchedule& schedule,
                       Manifest& manifest) {
    ordered_json report;
    if (cfg.init.quantum()) {
        auto arm = run_quantum_arm(params, schedule, cfg);
        write_energy_csv(manifest.dir() / "energy.csv", &arm.series, nullptr);
        manifest.add_output("energy.csv");
        report["basis"] = arm.basis;
        if (arm.dist.prob.size() <= (std::size_t{1} << 22)) {
            write_distribution_csv(manifest.dir() / "distribution.csv", arm.dist);
            manifest.add_output("distribution.csv");
            best_effort_plot(cfg, [&] { plot_distribution(manifest.dir(), arm.dist, manifest); });
        }
        if (cfg.fit_window)
            report["fit"] = fit_json(loglog_fit(arm.series, cfg.fit_window->first, cfg.fit_window->second));
        best_effort_plot(cfg, [&] { plot_energy(manifest.dir(), &arm.series, nullptr, manifest); });
    } else {
        auto series = run_classical_arm(params, schedule, cfg);
        write_energy_csv(manifest.dir() / "energy.csv", nullptr, &series);
        manifest.add_output("energy.csv");
        if (cfg.fit_window)
            report["fit"] = fit_json(loglog_fit(series, cfg.fit_window->first, cfg.fit_window->second));
        best_effort_plot(cfg, [&] { plot_energy(manifest.dir(), nullptr, &series, manifest); });
    }
    if (!report.empty()) manifest.add_report("report", std::move(report));
}

inline void fit_report_to_file(Manifest& manifest) {
    if (!manifest.json().contains("report")) return;
    const auto path = manifest.dir() / "fit_report.json";
    {
        auto out = open_output(path);
        out << manifest.json()["report"].dump(2) << '\n';
        if (!out) throw IoError("write failed: " + path.string());
    } // close before the manifest measures and digests the file
    manifest.add_output("fit_report.json");
}

inline void run_compare(const RunConfig& cfg, const SimParams& params, const KickSchedule& schedule,
                        Manifest& manifest) {
    // Independent arms run concurrently.
    auto quantum_future =
        std::async(std::launch::async, [&] { return run_quantum_arm(params, schedule, cfg); });
    auto classical = run_classical_arm(params, schedule, cfg);
    auto arm = quantum_future.get();

    write_energy_csv(manifest.dir() / "energy.csv", &arm.series, &classical);
    manifest.add_output("energy.csv");

    ordered_json report;
    report["basis"] = arm.basis;
    const auto bt = break_time(arm.series, classical, cfg.break_threshold, cfg.break_sustained);
    report["break_time"] = break_json(bt);

    std::optional<std::pair<std::int64_t, std::int64_t>> window = cfg.fit_window;
    if (!window && bt.found) {
        const std::int64_t lo = std::max<std::int64_t>(2 * bt.t_b, 1);
        if (cfg.kicks - lo + 1 >= 10) window = {lo, cfg.kicks};
    }
    if (window) {
        report["fit_quantum"] = fit_json(loglog_fit(arm.series, window->first, window->second));
        report["fit_classical"] = fit_json(loglog_fit(classical, window->first, window->second));
    }
    report["final_energy_quantum"] = arm.series.values.back();
    report["final_energy_classical"] = classical.values.back();
    report["final_energy_ratio"] = energy_ratio(arm.series, classical, cfg.kicks);
    manifest.add_report("report", std::move(report));

    best_effort_plot(cfg, [&] { plot_energy(manifest.dir(), &arm.series, &classical, manifest); });

    fit_report_to_file(manifest);
}

inline void run_distribution(const RunConfig& cfg, const SimParams& params,
                             const KickSchedule& schedule, Manifest& manifest) {
    if (!cfg.init.quantum())
        throw ParameterError("distribution mode requires a quantum initial state (fock/gaussian)");
    auto arm = run_quantum_arm(params, schedule, cfg);
    write_energy_csv(manifest.dir() / "energy.csv", &arm.series, nullptr);
    manifest.add_output("energy.csv");
    write_distribution_csv(manifest.dir() / "distribution.csv", arm.dist);
    manifest.add_output("distribution.csv");
    ordered_json report;
    report["basis"] = arm.basis;
    report["final_energy"] = arm.series.values.back();
    manifest.add_report("report", std::move(report));
    best_effort_plot(cfg, [&] {
        plot_distribution(manifest.dir(), arm.dist, manifest);
        plot_energy(manifest.dir(), &arm.series, nullptr, manifest);
    });
}

inline void run_fit(const RunConfig& cfg, Manifest& manifest) {
    if (cfg.input_file.empty()) throw ParameterError("fit mode requires --in FILE");
    const CsvTable table = read_csv(cfg.input_file);
    const auto kick_col = table.column_index("kick_index");
    if (!kick_col) throw ParameterError("fit input has no kick_index column");

    auto series_of = [&](const std::string& name, EnsembleKind kind) -> std::optional<EnergySeries> {
        const auto col = table.column_index(name);
        if (!col) return std::nullopt;
        EnergySeries s;
        s.kind = kind;
        s.values = table.data[*col];
        return s;
    };
    const auto quantum = series_of("E_q", EnsembleKind::Quantum);
    const auto classical = series_of("E_c", EnsembleKind::Classical);
    if (!quantum && !classical) throw ParameterError("fit input has neither E_q nor E_c column");

    ordered_json report;
    std::optional<std::pair<std::int64_t, std::int64_t>> window = cfg.fit_window;
    if (quantum && classical) {
        const auto bt = break_time(*quantum, *classical, cfg.break_threshold, cfg.break_sustained);
        report["break_time"] = break_json(bt);
        if (!window && bt.found) {
            const std::int64_t lo = std::max<std::int64_t>(2 * bt.t_b, 1);
            if (quantum->last_kick() - lo + 1 >= 10) window = {lo, quantum->last_kick()};
        }
    }
    if (!window) throw ParameterError("fit mode needs --fit-window (no break time to derive it from)");
    if (quantum) report["fit_quantum"] = fit_json(loglog_fit(*quantum, window->first, window->second));
    if (classical)
        report["fit_classical"] = fit_json(loglog_fit(*classical, window->first, window->second));
    manifest.add_report("report", std::move(report));
    fit_report_to_file(manifest);
}

} // namespace detail

Manifest run_experiment(const RunConfig& cfg); // forward declaration

namespace detail {

// One grid point of a sweep: a compare run in its own subdirectory.
inline ordered_json run_sweep(const RunConfig& cfg, Manifest& manifest) {
    ordered_json grid = ordered_json::array();
    for (std::size_t ki = 0; ki < cfg.kappas.size(); ++ki)
        for (std::size_t ti = 0; ti < cfg.taus.size(); ++ti)
            for (std::size_t si = 0; si < cfg.schedules.size(); ++si) {
                RunConfig point = cfg;
                point.mode = RunMode::Compare;
                point.kappas = {cfg.kappas[ki]};
                point.taus = {cfg.taus[ti]};
                point.schedules = {cfg.schedules[si]};
                const std::string name = std::string(cfg.kappa_from_k ? "k=" : "kappa=") +
                                         format_double(cfg.kappas[ki]) + "_tau=" +
                                         format_double(cfg.taus[ti]) + "_" + cfg.schedules[si];
                point.out_dir = manifest.dir() / name;
                Manifest sub = run_experiment(point);
                grid.push_back(ordered_json{{"point", name}, {"status", sub.json()["status"]}});
                manifest.add_output(std::filesystem::path(name) / "manifest.json");
            }
    return grid;
}

} // namespace detail

// Execute one experiment: validates the configuration, runs the dynamics,
// writes data/plot files plus manifest.json into cfg.out_dir and returns
// the manifest. Reruns with identical config and seed reproduce identical
// data files. Numeric-guard failures still produce a (partial) manifest
// with a failure record before the exception propagates.
inline Manifest run_experiment(const RunConfig& cfg) {
    if (cfg.out_dir.empty()) throw ParameterError("output directory not set");
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.out_dir.string());

    Manifest manifest(mode_name(cfg.mode), detail::config_json(cfg), cfg.out_dir);

    try {
        if (cfg.mode == RunMode::Fit) {
            detail::run_fit(cfg, manifest);
        } else if (cfg.mode == RunMode::Sweep) {
            if (cfg.kappas.empty() || cfg.taus.empty() || cfg.schedules.empty())
                throw ParameterError("sweep needs kappa, tau and schedule lists");
            manifest.add_report("grid", detail::run_sweep(cfg, manifest));
        } else {
            if (cfg.kappas.size() != 1 || cfg.taus.size() != 1 || cfg.schedules.size() != 1)
                throw ParameterError(std::string(mode_name(cfg.mode)) +
                                     " mode takes exactly one kappa, tau and schedule");
            if (cfg.kicks < 1) throw ParameterError("kicks must be >= 1");
            const SimParams params = cfg.params_at(0, 0);
            const KickSchedule schedule = parse_schedule(cfg.schedules.front());
            switch (cfg.mode) {
            case RunMode::PhaseSpace: detail::run_phase_space(cfg, params, schedule, manifest); break;
            case RunMode::Evolve: detail::run_evolve(cfg, params, schedule, manifest); break;
            case RunMode::Compare: detail::run_compare(cfg, params, schedule, manifest); break;
            case RunMode::Distribution: detail::run_distribution(cfg, params, schedule, manifest); break;
            default: throw ParameterError("unhandled mode");
            }
        }
    } catch (const NumericError& e) {
        manifest.mark_failure("numeric-guard", e.what());
        manifest.write();
        throw;
    }
    manifest.write();
    return manifest;
}

} // namespace rotor::io
