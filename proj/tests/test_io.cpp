#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "rotor/io/experiment.hpp"
#include "rotor/io/runconfig.hpp"

using namespace rotor;
using namespace rotor::io;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "rotorsim-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

RunConfig small_compare_config(const fs::path& out) {
    RunConfig cfg;
    cfg.mode = RunMode::Compare;
    cfg.kappas = {3.5};
    cfg.taus = {0.1};
    cfg.schedules = {"mkr"};
    cfg.kicks = 40;
    cfg.basis = 4096;
    cfg.ensemble = 2000;
    cfg.init = InitSpec::parse("fock:0");
    cfg.out_dir = out;
    cfg.plots = true;
    return cfg;
}

} // namespace

TEST_CASE("InitSpec parsing") {
    CHECK(InitSpec::parse("fock:3").kind == InitSpec::Kind::Fock);
    CHECK(InitSpec::parse("fock:3").param == 3.0);
    CHECK(InitSpec::parse("gaussian:9").param == 9.0);
    CHECK(InitSpec::parse("uniform").kind == InitSpec::Kind::Uniform);
    CHECK(InitSpec::parse("wigner").param == 9.0);
    CHECK(InitSpec::parse("wigner:4").param == 4.0);
    CHECK_THROWS_AS(InitSpec::parse("fock"), ParameterError);
    CHECK_THROWS_AS(InitSpec::parse("fock:1.5"), ParameterError);
    CHECK_THROWS_AS(InitSpec::parse("gaussian"), ParameterError);
    CHECK_THROWS_AS(InitSpec::parse("uniform:2"), ParameterError);
    CHECK_THROWS_AS(InitSpec::parse("plane-wave"), ParameterError);
}

TEST_CASE("schedule text parsing") {
    CHECK(parse_schedule("kr").kind() == ScheduleKind::KR);
    CHECK(parse_schedule("mkr").kind() == ScheduleKind::MKR);
    CHECK(parse_schedule("gen6").period() == 12u);
    CHECK(parse_schedule("gen10").period() == 20u);
    CHECK_THROWS_AS(parse_schedule("gen4"), ParameterError);
    CHECK_THROWS_AS(parse_schedule("gen8"), ParameterError);
    CHECK_THROWS_AS(parse_schedule("gen"), ParameterError);
    CHECK_THROWS_AS(parse_schedule("krr"), ParameterError);
}

TEST_CASE("auto basis matches the working defaults") {
    CHECK(auto_basis(2000, 0.1, 1) == (std::int64_t{1} << 17));
    CHECK(auto_basis(3000, 0.1, 1) == (std::int64_t{1} << 18));
    CHECK(auto_basis(1200, 0.10364, 256) == 256 * (std::int64_t{1} << 17));
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.0, 1.0, 0.1, 3.141592653589793, 1e-300, 2.5e17, -7.25}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("compare experiment writes deterministic outputs") {
    const auto dir1 = temp_dir("cmp1");
    const auto dir2 = temp_dir("cmp2");
    const auto m1 = run_experiment(small_compare_config(dir1));
    const auto m2 = run_experiment(small_compare_config(dir2));

    // Byte-identical data outputs on rerun with identical config.
    CHECK(slurp(dir1 / "energy.csv") == slurp(dir2 / "energy.csv"));
    CHECK(slurp(dir1 / "manifest.json") == slurp(dir2 / "manifest.json"));

    // Manifest digests match the file contents.
    for (const auto& entry : m1.json()["outputs"]) {
        const auto path = dir1 / entry["path"].get<std::string>();
        CHECK(sha256_hex(path) == entry["sha256"].get<std::string>());
        CHECK(fs::file_size(path) == entry["bytes"].get<std::uint64_t>());
    }

    // Energy CSV: header + kicks+1 rows, first row zeros for a |0> start.
    const auto table = read_csv(dir1 / "energy.csv");
    REQUIRE(table.columns == std::vector<std::string>{"kick_index", "E_q", "E_c"});
    REQUIRE(table.data[0].size() == 41u);
    CHECK(table.data[0][0] == 0.0);
    CHECK(table.data[1][0] == 0.0);
    CHECK(table.data[2][0] == 0.0);
}

TEST_CASE("distribution experiment row count equals the basis size") {
    const auto dir = temp_dir("dist");
    RunConfig cfg = small_compare_config(dir);
    cfg.mode = RunMode::Distribution;
    cfg.kicks = 10;
    cfg.basis = 1024;
    run_experiment(cfg);
    const auto table = read_csv(dir / "distribution.csv");
    REQUIRE(table.columns == std::vector<std::string>{"m", "P_m"});
    CHECK(table.data[0].size() == 2048u); // 2B rows
    double total = 0;
    for (double p : table.data[1]) total += p;
    CHECK(total == Approx(1.0).margin(1e-10));
}

TEST_CASE("phase-space experiment emits the full point cloud") {
    const auto dir = temp_dir("section");
    RunConfig cfg;
    cfg.mode = RunMode::PhaseSpace;
    cfg.kappas = {3.5};
    cfg.taus = {1.0};
    cfg.schedules = {"mkr"};
    cfg.kicks = 50;
    cfg.ensemble = 100; // 10x10 grid
    cfg.out_dir = dir;
    run_experiment(cfg);
    const auto table = read_csv(dir / "section.csv");
    CHECK(table.data[0].size() == 100u * 50u);
    for (std::size_t i = 0; i < table.data[0].size(); i += 997) {
        CHECK(table.data[0][i] >= 0.0);
        CHECK(table.data[0][i] < two_pi);
        CHECK(table.data[1][i] >= 0.0);
        CHECK(table.data[1][i] < two_pi);
    }
}

TEST_CASE("evolve experiment with classical arm and fit") {
    const auto dir = temp_dir("evolve-classical");
    RunConfig cfg = small_compare_config(dir);
    cfg.mode = RunMode::Evolve;
    cfg.init = InitSpec::parse("uniform");
    cfg.kicks = 100;
    cfg.fit_window = {{10, 100}};
    const auto manifest = run_experiment(cfg);
    const auto table = read_csv(dir / "energy.csv");
    REQUIRE(table.columns == std::vector<std::string>{"kick_index", "E_c"});
    CHECK(manifest.json()["report"].contains("fit"));
}

TEST_CASE("fit experiment reproduces exponents from a CSV") {
    const auto dir = temp_dir("fitmode");
    // synthesize an exact power-law CSV
    EnergySeries q;
    q.kind = EnsembleKind::Quantum;
    q.values.resize(301);
    for (std::size_t n = 0; n <= 300; ++n)
        q.values[n] = 2.0 * std::pow(static_cast<double>(n), 1.85);
    write_energy_csv(dir / "energy.csv", &q, nullptr);

    RunConfig cfg;
    cfg.mode = RunMode::Fit;
    cfg.input_file = (dir / "energy.csv").string();
    cfg.fit_window = {{20, 300}};
    cfg.out_dir = dir / "out";
    const auto manifest = run_experiment(cfg);
    const double a = manifest.json()["report"]["fit_quantum"]["a"].get<double>();
    CHECK(a == Approx(1.85).margin(1e-10));
    CHECK(fs::exists(dir / "out" / "fit_report.json"));
}

TEST_CASE("sweep experiment creates one subdirectory per grid point") {
    const auto dir = temp_dir("sweep");
    RunConfig cfg = small_compare_config(dir);
    cfg.mode = RunMode::Sweep;
    cfg.kappas = {3.4, 3.6};
    cfg.taus = {0.1};
    cfg.schedules = {"mkr", "kr"};
    cfg.kicks = 30;
    cfg.basis = 2048;
    cfg.ensemble = 500;
    cfg.plots = false;
    const auto manifest = run_experiment(cfg);
    CHECK(manifest.json()["grid"].size() == 4u);
    CHECK(fs::exists(dir / "kappa=3.4_tau=0.1_mkr" / "energy.csv"));
    CHECK(fs::exists(dir / "kappa=3.6_tau=0.1_kr" / "manifest.json"));
}

TEST_CASE("numeric guard failures leave a partial manifest") {
    const auto dir = temp_dir("guardfail");
    RunConfig cfg = small_compare_config(dir);
    cfg.mode = RunMode::Evolve;
    cfg.basis = 64; // far too small for k = 35: truncation guard must trip
    cfg.kicks = 10;
    CHECK_THROWS_AS(run_experiment(cfg), NumericError);
    REQUIRE(fs::exists(dir / "manifest.json"));
    const auto text = slurp(dir / "manifest.json");
    CHECK(text.find("\"status\": \"failure\"") != std::string::npos);
    CHECK(text.find("numeric-guard") != std::string::npos);
}

TEST_CASE("config validation catches mode misuse") {
    RunConfig cfg = small_compare_config(temp_dir("badcfg"));
    cfg.kappas = {3.4, 3.6}; // two kappas outside sweep mode
    CHECK_THROWS_AS(run_experiment(cfg), ParameterError);

    RunConfig nodir = small_compare_config("");
    nodir.out_dir.clear();
    CHECK_THROWS_AS(run_experiment(nodir), ParameterError);
}
