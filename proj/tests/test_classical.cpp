#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rotor/classical.hpp"
#include "rotor/schedule.hpp"

using namespace rotor;
using Catch::Approx;
constexpr double pi = std::numbers::pi;

TEST_CASE("map_step direct substitution") {
    const auto out = map_step({0.0, pi / 2}, 3.5, 1);
    CHECK(out.l_tilde == Approx(3.5).epsilon(1e-15));
    CHECK(out.theta == Approx(pi / 2 + 3.5).epsilon(1e-15));

    // kappa = 0 is free rotation
    const auto free = map_step({1.25, 0.7}, 0.0, 1);
    CHECK(free.l_tilde == 1.25);
    CHECK(free.theta == Approx(0.7 + 1.25));
}

TEST_CASE("map_step errors") {
    CHECK_THROWS_AS(map_step({std::nan(""), 0.0}, 1.0, 1), NumericError);
    CHECK_THROWS_AS(map_step({0.0, 0.0}, 1.0, 0), ParameterError);
}

TEST_CASE("MKR marginal point gains pi per kick (hand iteration)") {
    const auto mkr = make_schedule(ScheduleKind::MKR);
    PhasePoint p{pi, pi / 2};
    const double expected_l[] = {2 * pi, 3 * pi, 4 * pi, 5 * pi};
    for (int n = 1; n <= 4; ++n) {
        p = map_step(p, pi, mkr.sign(n));
        CHECK(p.l_tilde == Approx(expected_l[n - 1]).epsilon(1e-13));
    }
    const double theta_mod = std::fmod(p.theta, two_pi);
    CHECK(theta_mod == Approx(pi / 2).margin(1e-10));
}

TEST_CASE("inverse map recovers the input") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const PhasePoint p{10.0 * (uniform_unit(rng) - 0.5), two_pi * uniform_unit(rng)};
        const double kappa = 8.0 * uniform_unit(rng) + 0.01;
        const int sign = uniform_unit(rng) < 0.5 ? 1 : -1;
        const auto fwd = map_step(p, kappa, sign);
        const auto back = map_step_inverse(fwd, kappa, sign);
        CHECK(back.l_tilde == Approx(p.l_tilde).margin(1e-12));
        CHECK(back.theta == Approx(p.theta).margin(1e-12));
    }
}

TEST_CASE("map_step is area preserving (finite-difference Jacobian)") {
    std::mt19937_64 rng(42);
    const double h = 1e-6;
    for (int trial = 0; trial < 200; ++trial) {
        const PhasePoint p{6.0 * (uniform_unit(rng) - 0.5), two_pi * uniform_unit(rng)};
        const double kappa = 7.0 * uniform_unit(rng) + 0.05;
        const int sign = uniform_unit(rng) < 0.5 ? 1 : -1;
        const auto lp = map_step({p.l_tilde + h, p.theta}, kappa, sign);
        const auto lm = map_step({p.l_tilde - h, p.theta}, kappa, sign);
        const auto tp = map_step({p.l_tilde, p.theta + h}, kappa, sign);
        const auto tm = map_step({p.l_tilde, p.theta - h}, kappa, sign);
        const double dl_dl = (lp.l_tilde - lm.l_tilde) / (2 * h);
        const double dl_dt = (tp.l_tilde - tm.l_tilde) / (2 * h);
        const double dt_dl = (lp.theta - lm.theta) / (2 * h);
        const double dt_dt = (tp.theta - tm.theta) / (2 * h);
        const double det = dl_dl * dt_dt - dl_dt * dt_dl;
        CHECK(det == Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("classical_energy examples") {
    CHECK(classical_energy({{{2.0, 0.1}, {-2.0, 0.5}}, {}}) == Approx(2.0));
    CHECK(classical_energy({{{0.0, 0.1}, {0.0, 0.5}}, {}}) == 0.0);
    CHECK(classical_energy({{{pi, 1.0}}, {}}) == Approx(pi * pi / 2));
    CHECK_THROWS_AS(classical_energy({}), ParameterError);
}

TEST_CASE("evolve_ensemble basics") {
    const auto mkr = make_schedule(ScheduleKind::MKR);
    CHECK_THROWS_AS(evolve_ensemble({}, mkr, 3.5, 10), ParameterError);
    CHECK_THROWS_AS(evolve_ensemble(uniform_theta_ensemble(10), mkr, 3.5, 0), ParameterError);

    // kappa = 0: no kick ever changes L, energy constant
    auto e = uniform_theta_ensemble(64);
    for (auto& p : e.points) p.l_tilde = 1.5;
    const auto [fin, series] = evolve_ensemble(e, mkr, 0.0, 50);
    REQUIRE(series.values.size() == 51);
    for (double v : series.values) CHECK(v == Approx(1.5 * 1.5 / 2).epsilon(1e-15));
    CHECK(fin.points.size() == e.points.size());
}

TEST_CASE("single marginal trajectory has closed-form energy") {
    const auto mkr = make_schedule(ScheduleKind::MKR);
    ClassicalEnsemble e{{{pi, pi / 2}}, {}};
    const auto [fin, series] = evolve_ensemble(e, mkr, pi, 200);
    for (std::int64_t n = 0; n <= 200; ++n) {
        const double expect = std::pow(pi * (static_cast<double>(n) + 1.0), 2) / 2.0;
        CHECK(series.values[static_cast<std::size_t>(n)] == Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("energy series is invariant under point permutation") {
    const auto mkr = make_schedule(ScheduleKind::MKR);
    auto e = uniform_theta_ensemble(5000);
    auto shuffled = e;
    std::mt19937_64 rng(3);
    std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);
    const auto a = evolve_ensemble(e, mkr, 3.5, 100).second;
    const auto b = evolve_ensemble(shuffled, mkr, 3.5, 100).second;
    for (std::size_t n = 0; n < a.values.size(); ++n)
        CHECK(a.values[n] == Approx(b.values[n]).epsilon(1e-12));
}

TEST_CASE("shifting theta by 2*pi yields identical trajectories") {
    const auto mkr = make_schedule(ScheduleKind::MKR);

    // Dyadic angles: theta + 2*pi is exactly representable, so the wrapped
    // start collapses to the same double and the trajectories are bitwise
    // identical indefinitely.
    {
        ClassicalEnsemble base, shifted;
        for (int i = 1; i < 32; ++i) {
            const double theta = static_cast<double>(i) / 8.0;
            const double l = static_cast<double>(i % 7) - 3.0;
            base.points.push_back({l, theta});
            shifted.points.push_back({l, theta + two_pi});
        }
        const auto a = evolve_ensemble(base, mkr, 3.5, 500);
        const auto b = evolve_ensemble(shifted, mkr, 3.5, 500);
        for (std::size_t i = 0; i < base.points.size(); ++i) {
            CHECK(a.first.points[i].l_tilde == b.first.points[i].l_tilde); // bitwise
            CHECK(a.first.points[i].theta == b.first.points[i].theta);
        }
    }

    // Generic angles: fl(theta + 2*pi) itself carries up to half an ulp of
    // rounding, which chaos amplifies by ~e^(lambda n); over a short horizon
    // the trajectories must still coincide to within that bound.
    {
        ClassicalEnsemble base, shifted;
        std::mt19937_64 rng(9);
        for (int i = 0; i < 32; ++i) {
            const double theta = two_pi * uniform_unit(rng);
            const double l = 4.0 * (uniform_unit(rng) - 0.5);
            base.points.push_back({l, theta});
            shifted.points.push_back({l, theta + two_pi});
        }
        const auto a = evolve_ensemble(base, mkr, 3.5, 12);
        const auto b = evolve_ensemble(shifted, mkr, 3.5, 12);
        for (std::size_t i = 0; i < base.points.size(); ++i)
            CHECK(a.first.points[i].l_tilde == Approx(b.first.points[i].l_tilde).margin(1e-9));
    }
}

TEST_CASE("poincare_section point count and marginal cycle") {
    const auto mkr = make_schedule(ScheduleKind::MKR);
    const auto grid = grid_ensemble(PhaseCell{}, 10); // 100 points
    const auto cloud = poincare_section(grid, mkr, 3.5, 500);
    CHECK(cloud.size() == 100u * 500u);

    // Marginal trajectory visits a 4-cycle in the reduced cell.
    ClassicalEnsemble single{{{pi, pi / 2}}, {}};
    const auto pts = poincare_section(single, mkr, pi, 8);
    const double expect[4][2] = {
        {pi / 2, 0.0}, {3 * pi / 2, pi}, {3 * pi / 2, 0.0}, {pi / 2, pi}};
    for (int n = 0; n < 8; ++n) {
        CHECK(pts[static_cast<std::size_t>(n)][0] == Approx(expect[n % 4][0]).margin(1e-9));
        CHECK(std::min(pts[static_cast<std::size_t>(n)][1],
                       std::abs(pts[static_cast<std::size_t>(n)][1] - two_pi)) ==
              Approx(expect[n % 4][1]).margin(1e-9));
    }
}

TEST_CASE("transport classification") {
    const auto mkr = make_schedule(ScheduleKind::MKR);

    const auto marginal = transport_classify({pi, pi / 2}, mkr, pi, 10000, default_transport_tol);
    CHECK(marginal.is_transporting);
    CHECK(marginal.mean_gain == Approx(pi).margin(1e-10));

    const auto chaotic = transport_classify({0.0, 1.0}, mkr, 3.5, 10000, default_transport_tol);
    CHECK_FALSE(chaotic.is_transporting);
    CHECK(std::abs(chaotic.mean_gain) < pi / 2);

    const auto still = transport_classify({0.3, 1.0}, mkr, 0.0, 100, default_transport_tol);
    CHECK(still.mean_gain == 0.0);
    CHECK_FALSE(still.is_transporting);

    CHECK_THROWS_AS(transport_classify({0, 0}, mkr, 3.5, 100, 0.0), ParameterError);
}

TEST_CASE("island fraction separates MKR from KR at kappa = 3.5") {
    const auto mkr = make_schedule(ScheduleKind::MKR);
    const auto kr = make_schedule(ScheduleKind::KR);
    const double f_mkr = island_fraction(PhaseCell{}, 32, mkr, 3.5, 2000);
    const double f_kr = island_fraction(PhaseCell{}, 32, kr, 3.5, 2000);
    CHECK(f_mkr > 0.01);
    CHECK(f_kr < 1e-3);
    CHECK(island_fraction(PhaseCell{}, 32, mkr, 0.0, 200) == 0.0);

    CHECK_THROWS_AS(island_fraction({0, 0, 0, 1}, 32, mkr, 3.5, 100), ParameterError);
    CHECK_THROWS_AS(island_fraction(PhaseCell{}, 16, mkr, 3.5, 100), ParameterError);
}

TEST_CASE("wigner gaussian sampling moments") {
    const double sigma_theta = 3.0 / std::sqrt(2.0);
    const double tau = 0.1;
    const auto e = sample_wigner_gaussian(sigma_theta, tau, 1000000, 77);
    REQUIRE(e.points.size() == 1000000u);
    REQUIRE(e.seed == 77u);

    double st = 0, sl = 0, mt = 0, ml = 0;
    for (const auto& p : e.points) {
        mt += p.theta;
        ml += p.l_tilde;
    }
    mt /= static_cast<double>(e.points.size());
    ml /= static_cast<double>(e.points.size());
    for (const auto& p : e.points) {
        st += (p.theta - mt) * (p.theta - mt);
        sl += (p.l_tilde - ml) * (p.l_tilde - ml);
    }
    st = std::sqrt(st / static_cast<double>(e.points.size()));
    sl = std::sqrt(sl / static_cast<double>(e.points.size()));

    CHECK(st == Approx(sigma_theta).epsilon(0.01));
    CHECK(sl == Approx(tau * std::sqrt(2.0) / 6.0).epsilon(0.01)); // tau / (2 sigma_theta)

    const auto again = sample_wigner_gaussian(sigma_theta, tau, 1000, 5);
    const auto again2 = sample_wigner_gaussian(sigma_theta, tau, 1000, 5);
    for (std::size_t i = 0; i < again.points.size(); ++i) {
        CHECK(again.points[i].theta == again2.points[i].theta);
        CHECK(again.points[i].l_tilde == again2.points[i].l_tilde);
    }
    CHECK(sample_wigner_gaussian(sigma_theta, tau, 1, 1).points.size() == 1u);
    CHECK_THROWS_AS(sample_wigner_gaussian(0.0, tau, 10, 1), ParameterError);
}

TEST_CASE("marginal families stay exact over 1e4 kicks") {
    const auto mkr = make_schedule(ScheduleKind::MKR);
    // kappa = (2 l2 + 1) pi from ((2 l1 + 1) pi, pi/2): gain is exactly kappa
    // per kick, with machine-precision drift only.
    for (int l2 : {0, 1}) {
        const auto family = marginal_points(ScheduleKind::MKR, 1, l2);
        const auto orbit = trajectory(family.points[0], mkr, family.kappa, 10000);
        double max_dev = 0.0;
        for (std::size_t i = 0; i < orbit.size(); ++i) {
            const double expect = family.points[0].l_tilde + (static_cast<double>(i) + 1.0) * family.kappa;
            max_dev = std::max(max_dev, std::abs(orbit[i].l_tilde - expect));
        }
        CHECK(max_dev < 1e-8);
    }
}

TEST_CASE("energy series is identical across thread counts") {
    const auto mkr = make_schedule(ScheduleKind::MKR);
    const auto e = uniform_theta_ensemble(10000);
    setenv("ROTORSIM_THREADS", "1", 1);
    const auto serial = evolve_ensemble(e, mkr, 3.5, 100).second;
    setenv("ROTORSIM_THREADS", "4", 1);
    const auto threaded = evolve_ensemble(e, mkr, 3.5, 100).second;
    unsetenv("ROTORSIM_THREADS");
    for (std::size_t n = 0; n < serial.values.size(); ++n)
        CHECK(serial.values[n] == threaded.values[n]); // bitwise
}

TEST_CASE("stratified ensemble avoids the sin(theta)=0 fixed points") {
    const auto e = uniform_theta_ensemble(100000);
    for (std::size_t i = 0; i < e.points.size(); i += 9973) {
        CHECK(e.points[i].l_tilde == 0.0);
        CHECK(std::abs(std::sin(e.points[i].theta)) > 1e-6);
    }
    CHECK_FALSE(e.seed.has_value());
}
