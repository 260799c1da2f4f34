#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "rotor/params.hpp"
#include "rotor/schedule.hpp"

using namespace rotor;
using Catch::Approx;
constexpr double pi = std::numbers::pi;

TEST_CASE("SimParams derives k from kappa and back") {
    const auto p = SimParams::from_kappa(3.5, 0.1);
    CHECK(p.k() == Approx(35.0).epsilon(1e-14));
    CHECK(p.consistent());

    const auto q = SimParams::from_k(35.0, 0.1);
    CHECK(q.kappa() == Approx(3.5).epsilon(1e-14));
    CHECK(q.consistent());
    CHECK(std::abs(q.k() * q.tau() - q.kappa()) <= 1e-12 * q.kappa());
}

TEST_CASE("SimParams validation") {
    CHECK_THROWS_AS(SimParams::from_kappa(0.0, 0.1), ParameterError);
    CHECK_THROWS_AS(SimParams::from_kappa(-1.0, 0.1), ParameterError);
    CHECK_THROWS_AS(SimParams::from_kappa(3.5, 0.0), ParameterError);
    CHECK_THROWS_AS(SimParams::from_k(0.0, 0.1), ParameterError);
    CHECK_THROWS_AS(SimParams::from_kappa(3.5, 0.1, 0), ParameterError);
}

TEST_CASE("schedule patterns") {
    const auto kr = make_schedule(ScheduleKind::KR);
    CHECK(kr.pattern() == std::vector<int>{1});

    const auto mkr = make_schedule(ScheduleKind::MKR);
    CHECK(mkr.pattern() == std::vector<int>{1, 1, -1, -1});
    CHECK(mkr.label() == "MKR");

    const auto gen = make_schedule(ScheduleKind::GEN, 3);
    REQUIRE(gen.period() == 12);
    for (std::size_t i = 0; i < 6; ++i) CHECK(gen.pattern()[i] == 1);
    for (std::size_t i = 6; i < 12; ++i) CHECK(gen.pattern()[i] == -1);
    CHECK(gen.label() == "GEN(6)");
}

TEST_CASE("schedule sign is 1-based, f(n)=1 for n=4j+1, 4j+2") {
    const auto mkr = make_schedule(ScheduleKind::MKR);
    for (std::int64_t j = 0; j < 5; ++j) {
        CHECK(mkr.sign(4 * j + 1) == 1);
        CHECK(mkr.sign(4 * j + 2) == 1);
        CHECK(mkr.sign(4 * j + 3) == -1);
        CHECK(mkr.sign(4 * j + 4) == -1);
    }
}

TEST_CASE("schedule periodicity and zero net impulse") {
    for (auto kind : {ScheduleKind::KR, ScheduleKind::MKR, ScheduleKind::GEN}) {
        const auto s = kind == ScheduleKind::GEN ? make_schedule(kind, 5) : make_schedule(kind);
        const auto period = static_cast<std::int64_t>(s.period());
        for (std::int64_t n = 1; n <= 3 * period; ++n) CHECK(s.sign(n + period) == s.sign(n));
    }
    const auto mkr = make_schedule(ScheduleKind::MKR);
    int sum = 0;
    for (std::int64_t n = 1; n <= static_cast<std::int64_t>(mkr.period()); ++n) sum += mkr.sign(n);
    CHECK(sum == 0);
}

TEST_CASE("GEN schedule validation") {
    CHECK_THROWS_AS(make_schedule(ScheduleKind::GEN), ParameterError);
    CHECK_THROWS_AS(make_schedule(ScheduleKind::GEN, 2), ParameterError);
    CHECK_THROWS_AS(make_schedule(ScheduleKind::GEN, 4), ParameterError);
    CHECK_THROWS_AS(make_schedule(ScheduleKind::GEN, 1), ParameterError);
}

TEST_CASE("marginal points") {
    const auto mkr0 = marginal_points(ScheduleKind::MKR, 0, 0);
    CHECK(mkr0.kappa == Approx(pi));
    REQUIRE(mkr0.points.size() == 2);
    CHECK(mkr0.points[0].l_tilde == Approx(pi));
    CHECK(mkr0.points[0].theta == Approx(pi / 2));
    CHECK(mkr0.points[1].theta == Approx(3 * pi / 2));

    const auto kr = marginal_points(ScheduleKind::KR, 0, 1);
    CHECK(kr.kappa == Approx(2 * pi));
    CHECK(kr.points[0].l_tilde == 0.0);
    CHECK(kr.points[0].theta == Approx(pi / 2));

    const auto mkr1 = marginal_points(ScheduleKind::MKR, 1, 1);
    CHECK(mkr1.kappa == Approx(3 * pi));
    CHECK(mkr1.points[0].l_tilde == Approx(3 * pi));
}
