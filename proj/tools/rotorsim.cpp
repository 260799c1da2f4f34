// rotorsim: kicked-rotor / sign-modulated kicked-rotor experiment driver.
//
// Subcommands: phase-space, evolve, compare, distribution, sweep, fit.
// Every run writes its data files plus a manifest.json with the resolved
// configuration and content digests; identical config + seed reproduces
// identical data files.

#include <CLI11.hpp>

#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rotor/errors.hpp"
#include "rotor/io/experiment.hpp"
#include "rotor/io/runconfig.hpp"
#include "rotor/version.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;
constexpr int exit_io = 4;

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw rotor::ParameterError(std::string("bad ") + what + " value '" + item + "'");
        }
    }
    if (out.empty()) throw rotor::ParameterError(std::string("empty ") + what + " list");
    return out;
}

std::vector<std::string> parse_string_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

struct CliOptions {
    std::string kappa, k, tau, schedule = "mkr";
    std::int64_t kicks = 0;
    std::int64_t basis = 0;
    std::int64_t ensemble = 100000;
    std::uint64_t seed = 1;
    int boundary_mult = 1;
    std::string init = "fock:0";
    std::string out;
    std::string fit_window;
    double break_threshold = 0.2;
    std::int64_t break_sustained = 10;
    bool no_plots = false;
    std::string input;
    std::string config_path;
};

// Flat key=value config file; keys mirror the long flag names. Values only
// apply where the command line did not already set the flag.
void apply_config_file(const CLI::App* cmd, CliOptions& opt) {
    if (opt.config_path.empty()) return;
    std::ifstream in(opt.config_path);
    if (!in) throw rotor::io::IoError("cannot read config file " + opt.config_path);

    auto given = [&](const std::string& flag) {
        const auto* o = cmd->get_option_no_throw(flag);
        return o != nullptr && o->count() > 0;
    };
    auto has = [&](const std::string& flag) {
        return cmd->get_option_no_throw(flag) != nullptr;
    };

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s2) {
            const auto b = s2.find_first_not_of(" \t\r");
            const auto e = s2.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s2.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw rotor::ParameterError("config line " + std::to_string(lineno) +
                                        " is not key=value: '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string flag = "--" + key;
        if (!has(flag))
            throw rotor::ParameterError("unknown config key '" + key + "' in " + opt.config_path);
        if (given(flag)) continue; // flags win

        auto set_int = [&](std::int64_t& field) { field = std::stoll(value); };
        try {
            if (key == "kappa") opt.kappa = value;
            else if (key == "k") opt.k = value;
            else if (key == "tau") opt.tau = value;
            else if (key == "schedule") opt.schedule = value;
            else if (key == "kicks") set_int(opt.kicks);
            else if (key == "basis") set_int(opt.basis);
            else if (key == "ensemble") set_int(opt.ensemble);
            else if (key == "seed") opt.seed = std::stoull(value);
            else if (key == "boundary-mult") opt.boundary_mult = std::stoi(value);
            else if (key == "init") opt.init = value;
            else if (key == "out") opt.out = value;
            else if (key == "fit-window") opt.fit_window = value;
            else if (key == "break-threshold") opt.break_threshold = std::stod(value);
            else if (key == "break-sustained") set_int(opt.break_sustained);
            else if (key == "no-plots") opt.no_plots = (value == "1" || value == "true");
            else if (key == "in") opt.input = value;
            else if (key == "config")
                throw rotor::ParameterError("config files cannot nest");
            else
                throw rotor::ParameterError("unknown config key '" + key + "'");
        } catch (const rotor::ParameterError&) {
            throw;
        } catch (const std::exception&) {
            throw rotor::ParameterError("bad value for config key '" + key + "': '" + value + "'");
        }
    }
}

std::filesystem::path default_out_dir(const std::string& mode) {
    const char* root = std::getenv("ROTORSIM_OUT_ROOT");
    return std::filesystem::path(root ? root : "rotorsim-out") / mode;
}

rotor::io::RunConfig to_config(rotor::io::RunMode mode, const CliOptions& opt) {
    using rotor::ParameterError;
    rotor::io::RunConfig cfg;
    cfg.mode = mode;

    if (!opt.kappa.empty() && !opt.k.empty())
        throw ParameterError("give either --kappa or --k, not both");
    if (!opt.k.empty()) {
        cfg.kappas = parse_double_list(opt.k, "k");
        cfg.kappa_from_k = true;
    } else if (!opt.kappa.empty()) {
        cfg.kappas = parse_double_list(opt.kappa, "kappa");
    }
    if (!opt.tau.empty()) cfg.taus = parse_double_list(opt.tau, "tau");

    cfg.schedules = parse_string_list(opt.schedule);
    for (const auto& s : cfg.schedules) rotor::io::parse_schedule(s); // validate early

    if (mode != rotor::io::RunMode::Fit) {
        if (cfg.kappas.empty()) throw ParameterError("--kappa (or --k with --tau) is required");
        if (cfg.taus.empty()) {
            // The classical map depends only on kappa; phase-space runs may
            // omit tau.
            if (mode == rotor::io::RunMode::PhaseSpace && !cfg.kappa_from_k)
                cfg.taus = {1.0};
            else
                throw ParameterError("--tau is required");
        }
    } else {
        if (cfg.kappas.empty()) cfg.kappas = {1.0};
        if (cfg.taus.empty()) cfg.taus = {1.0};
    }

    cfg.kicks = opt.kicks;
    if (opt.basis > 0) cfg.basis = opt.basis;
    cfg.ensemble = opt.ensemble;
    cfg.seed = opt.seed;
    cfg.boundary_mult = opt.boundary_mult;
    cfg.init = rotor::io::InitSpec::parse(opt.init);
    cfg.out_dir = opt.out.empty() ? default_out_dir(rotor::io::mode_name(mode))
                                  : std::filesystem::path(opt.out);
    if (!opt.fit_window.empty()) {
        const auto colon = opt.fit_window.find(':');
        if (colon == std::string::npos)
            throw ParameterError("--fit-window expects LO:HI");
        try {
            cfg.fit_window = {std::stoll(opt.fit_window.substr(0, colon)),
                              std::stoll(opt.fit_window.substr(colon + 1))};
        } catch (const std::exception&) {
            throw ParameterError("bad --fit-window '" + opt.fit_window + "'");
        }
    }
    cfg.break_threshold = opt.break_threshold;
    cfg.break_sustained = opt.break_sustained;
    cfg.plots = !opt.no_plots;
    cfg.input_file = opt.input;
    return cfg;
}

void add_common_flags(CLI::App* cmd, CliOptions& opt, bool wants_quantum) {
    cmd->add_option("--config", opt.config_path,
                    "flat key=value config file; command-line flags win");
    cmd->add_option("--kappa", opt.kappa, "classical kick strength (comma list in sweep mode)");
    cmd->add_option("--k", opt.k, "quantum kick strength k = kappa/tau (alternative to --kappa)");
    cmd->add_option("--tau", opt.tau, "effective Planck constant (comma list in sweep mode)");
    cmd->add_option("--schedule", opt.schedule, "kick schedule: kr, mkr or genN (N = 6,10,14,...)");
    cmd->add_option("--kicks", opt.kicks, "number of kicks");
    cmd->add_option("--out", opt.out, "output directory (default $ROTORSIM_OUT_ROOT/<mode>)");
    cmd->add_flag("--no-plots", opt.no_plots, "skip SVG plot emission");
    cmd->add_option("--ensemble", opt.ensemble, "classical ensemble size / phase-space grid points");
    cmd->add_option("--seed", opt.seed, "RNG seed for sampled ensembles");
    if (wants_quantum) {
        cmd->add_option("--basis", opt.basis, "momentum basis half-size B (default: auto-sized)");
        cmd->add_option("--boundary-mult", opt.boundary_mult,
                        "boundary multiplier M (spatial period 2*pi*M)");
        cmd->add_option("--init", opt.init,
                        "initial state: fock:m0, gaussian:s, uniform or wigner[:s]");
    }
    cmd->add_option("--fit-window", opt.fit_window, "power-law fit window LO:HI (kicks)");
    cmd->add_option("--break-threshold", opt.break_threshold,
                    "relative deviation threshold for the break-time detector");
    cmd->add_option("--break-sustained", opt.break_sustained,
                    "debounce window (kicks) for the break-time detector");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kicked-rotor / modulated kicked-rotor simulator"};
    app.set_version_flag("--version", std::string("rotorsim ") + rotor::version);
    app.require_subcommand(1);

    CliOptions opt;
    using rotor::io::RunMode;
    struct ModeCmd {
        RunMode mode;
        CLI::App* cmd;
    };
    std::vector<ModeCmd> cmds;

    auto* phase = app.add_subcommand("phase-space", "Poincare section of the classical map");
    add_common_flags(phase, opt, false);
    cmds.push_back({RunMode::PhaseSpace, phase});

    auto* evolve = app.add_subcommand("evolve", "evolve one quantum or classical arm");
    add_common_flags(evolve, opt, true);
    cmds.push_back({RunMode::Evolve, evolve});

    auto* compare = app.add_subcommand("compare", "quantum vs classical energy comparison");
    add_common_flags(compare, opt, true);
    cmds.push_back({RunMode::Compare, compare});

    auto* dist = app.add_subcommand("distribution", "momentum distribution P(m) after N kicks");
    add_common_flags(dist, opt, true);
    cmds.push_back({RunMode::Distribution, dist});

    auto* sweep = app.add_subcommand("sweep", "Cartesian parameter sweep of compare runs");
    add_common_flags(sweep, opt, true);
    cmds.push_back({RunMode::Sweep, sweep});

    auto* fit = app.add_subcommand("fit", "fit power-law exponents on an energy CSV");
    fit->add_option("--in", opt.input, "energy CSV produced by evolve/compare")->required();
    add_common_flags(fit, opt, false);
    cmds.push_back({RunMode::Fit, fit});

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_config;
    }

    try {
        for (const auto& mc : cmds) {
            if (!mc.cmd->parsed()) continue;
            apply_config_file(mc.cmd, opt);
            const auto cfg = to_config(mc.mode, opt);
            const auto manifest = rotor::io::run_experiment(cfg);
            std::cout << "wrote " << (cfg.out_dir / "manifest.json").string() << "\n";
            if (manifest.json().contains("report"))
                std::cout << manifest.json()["report"].dump(2) << "\n";
        }
        return exit_ok;
    } catch (const rotor::NumericError& e) {
        std::cerr << "numeric guard: " << e.what() << "\n";
        return exit_numeric;
    } catch (const rotor::ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const rotor::io::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    }
}
