#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tcbf/abstraction.hpp"
#include "tcbf/qp.hpp"
#include "tcbf/rng.hpp"

using namespace tcbf;
using abstraction::AbstractState;
using abstraction::ExpCbfParams;
using abstraction::Obstacle;

namespace {

AbstractState random_state(Rng& rng, double scale) {
    return {{rng.symmetric(scale), rng.symmetric(scale), rng.symmetric(scale)},
            {rng.symmetric(scale), rng.symmetric(scale), rng.symmetric(scale)}};
}

}  // namespace

TEST_SUITE("abstraction") {

TEST_CASE("double integrator dynamics") {
    const auto d0 = abstraction::di_dynamics({{}, {}}, {});
    CHECK(d0.dp.norm() == 0.0);
    CHECK(d0.dv.norm() == 0.0);

    const auto d1 = abstraction::di_dynamics({{}, {1.0, 0.0, 0.0}}, {0.0, 0.0, -9.81});
    CHECK(d1.dp.x == 1.0);
    CHECK(d1.dv.z == -9.81);
}

TEST_CASE("one RK4 step from rest matches the exact double-integrator flow") {
    // constant acceleration: p = a t^2/2, v = a t; RK4 is exact here
    AbstractState x{{}, {}};
    const Vec3 u{1.0, 0.0, 0.0};
    const double dt = 0.1;
    const auto f = [&](const AbstractState& s) { return abstraction::di_dynamics(s, u); };
    const auto k1 = f(x);
    AbstractState s2{x.p + 0.5 * dt * k1.dp, x.v + 0.5 * dt * k1.dv};
    const auto k2 = f(s2);
    AbstractState s3{x.p + 0.5 * dt * k2.dp, x.v + 0.5 * dt * k2.dv};
    const auto k3 = f(s3);
    AbstractState s4{x.p + dt * k3.dp, x.v + dt * k3.dv};
    const auto k4 = f(s4);
    x.p += dt / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    x.v += dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    CHECK(x.p.x == doctest::Approx(0.005).epsilon(1e-14));
    CHECK(x.v.x == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("h value at reference points") {
    const Obstacle obs{{0.0, 0.0, 0.0}, 1.0, 0.0};
    CHECK(abstraction::h({{2.0, 0.0, 0.0}, {}}, obs) == doctest::Approx(3.0));
    CHECK(abstraction::h({{1.0, 0.0, 0.0}, {}}, obs) == doctest::Approx(0.0));
}

TEST_CASE("b1 value at reference points") {
    const Obstacle obs{{0.0, 0.0, 0.0}, 1.0, 0.0};
    const ExpCbfParams params{1.0, 1.0};
    CHECK(abstraction::b1({{2.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}, obs, params) ==
          doctest::Approx(7.0));  // 2 p.v + k1 h = 4 + 3
    CHECK(abstraction::b1({{0.0, 1.0, 0.0}, {}}, obs, params) == doctest::Approx(0.0));
}

TEST_CASE("gradients match finite differences") {
    Rng rng(3);
    const Obstacle obs{{0.5, -0.25, 1.0}, 0.8, 0.2};
    const ExpCbfParams params{1.3, 0.7};
    for (int trial = 0; trial < 100; ++trial) {
        const AbstractState x = random_state(rng, 3.0);
        const auto gh = abstraction::grad_h(x, obs);
        const auto gb = abstraction::grad_b1(x, obs, params);
        for (int axis = 0; axis < 3; ++axis) {
            const auto bump_p = [&](double d) {
                AbstractState y = x;
                (axis == 0 ? y.p.x : axis == 1 ? y.p.y : y.p.z) += d;
                return y;
            };
            const auto bump_v = [&](double d) {
                AbstractState y = x;
                (axis == 0 ? y.v.x : axis == 1 ? y.v.y : y.v.z) += d;
                return y;
            };
            const double fd_hp = oracle::central_diff(
                [&](double d) { return abstraction::h(bump_p(d), obs); }, 0.0, 1e-6);
            CHECK(gh.wrt_p[axis] == doctest::Approx(fd_hp).epsilon(1e-7));
            const double fd_hv = oracle::central_diff(
                [&](double d) { return abstraction::h(bump_v(d), obs); }, 0.0, 1e-6);
            CHECK(gh.wrt_v[axis] == doctest::Approx(fd_hv).epsilon(1e-7));

            const double fd_bp = oracle::central_diff(
                [&](double d) { return abstraction::b1(bump_p(d), obs, params); }, 0.0, 1e-6);
            CHECK(gb.wrt_p[axis] == doctest::Approx(fd_bp).epsilon(1e-6));
            const double fd_bv = oracle::central_diff(
                [&](double d) { return abstraction::b1(bump_v(d), obs, params); }, 0.0, 1e-6);
            CHECK(gb.wrt_v[axis] == doctest::Approx(fd_bv).epsilon(1e-6));
        }
    }
}

TEST_CASE("cbf row at reference states") {
    const Obstacle obs{{0.0, 0.0, 0.0}, 1.0, 0.0};
    const ExpCbfParams params{1.0, 1.0};

    SUBCASE("far state is inactive") {
        const auto row = abstraction::abstract_cbf_row({{10.0, 0.0, 0.0}, {}}, obs, params);
        CHECK(row.beta < -50.0);  // strongly negative bound
        CHECK(row.a.x == doctest::Approx(20.0));
    }
    SUBCASE("on the sphere at rest: outward acceleration required") {
        const auto row = abstraction::abstract_cbf_row({{1.0, 0.0, 0.0}, {}}, obs, params);
        CHECK(row.a.x == doctest::Approx(2.0));
        CHECK(row.beta == doctest::Approx(0.0));
    }
}

TEST_CASE("closed-loop double integrator stays safe under the clipped input") {
    // 10 seeded scenarios: nominal pull toward the obstacle center, input
    // clipped by the abstract CBF row; h and b1 must stay >= -1e-6.
    const ExpCbfParams params{2.0, 2.0};
    for (int seed = 1; seed <= 10; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed));
        const Obstacle obs{{rng.symmetric(0.5), rng.symmetric(0.5), 0.0}, 0.8, 0.2};
        AbstractState x{{4.0 + rng.uniform01(), rng.symmetric(1.0), 0.0}, {}};
        REQUIRE(abstraction::h(x, obs) > 0.0);
        REQUIRE(abstraction::b1(x, obs, params) > 0.0);

        const double dt = 1e-3;
        double min_h = 1e300;
        double min_b1 = 1e300;
        for (int k = 0; k < 8000; ++k) {
            const Vec3 u_nom = (obs.center - x.p) * 2.0 - x.v * 0.5;  // dives at the obstacle
            const auto row = abstraction::abstract_cbf_row(x, obs, params);

            qp::QpProblem problem;
            problem.u_nom = {u_nom.x, u_nom.y, u_nom.z};
            problem.rows.push_back({{row.a.x, row.a.y, row.a.z}, row.beta});
            const auto sol = qp::qp_solve(problem);
            REQUIRE(sol.status == qp::QpStatus::Optimal);
            const Vec3 u{sol.u[0], sol.u[1], sol.u[2]};

            // exact flow under constant acceleration over dt
            x.p += x.v * dt + u * (0.5 * dt * dt);
            x.v += u * dt;
            min_h = std::min(min_h, abstraction::h(x, obs));
            min_b1 = std::min(min_b1, abstraction::b1(x, obs, params));
        }
        CHECK(min_h >= -1e-6);
        CHECK(min_b1 >= -1e-6);
    }
}

TEST_CASE("obstacle validation") {
    Obstacle bad{{0.0, 0.0, 0.0}, -1.0, 0.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    Obstacle neg_inflation{{0.0, 0.0, 0.0}, 1.0, -0.1};
    CHECK_THROWS_AS(neg_inflation.validate(), std::invalid_argument);
    CHECK(Obstacle{{0.0, 0.0, 0.0}, 0.5, 0.3}.inflated_radius() == doctest::Approx(0.8));
}

}  // TEST_SUITE
