#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tcbf/margin.hpp"
#include "tcbf/rng.hpp"

using namespace tcbf;
using margin::ComparisonProblem;
using margin::KFunction;
using margin::MarginFunction;

namespace {

ComparisonProblem linear_problem(double c_b, double c_v, double c_r, double s0, double eta) {
    ComparisonProblem p;
    p.alpha_b = KFunction::linear(c_b);
    p.alpha_v = KFunction::linear(c_v);
    p.r = c_r > 0.0 ? KFunction::linear(c_r) : KFunction::zero();
    p.s0 = s0;
    p.eta = eta;
    return p;
}

double rk45_solution(const ComparisonProblem& p, double s) {
    return oracle::rk45(
        [&](double tau, double y) { return (p.alpha_b(std::max(y, 0.0)) + p.r(tau)) / p.alpha_v(tau); },
        p.s0, p.eta, s);
}

}  // namespace

TEST_SUITE("margin") {

TEST_CASE("kfunction variants and class-K sampling") {
    const auto lin = KFunction::linear(2.0);
    CHECK(lin(0.0) == 0.0);
    CHECK(lin(1.5) == doctest::Approx(3.0));
    CHECK(lin.is_class_k_on(0.0, 10.0));

    const auto pow2 = KFunction::power_law(1.0, 2.0);
    CHECK(pow2(3.0) == doctest::Approx(9.0));
    CHECK(pow2.is_class_k_on(0.0, 10.0));

    CHECK(KFunction::zero()(5.0) == 0.0);
    CHECK_FALSE(KFunction::zero().is_class_k_on(0.0, 1.0));

    CHECK_THROWS_AS((void)KFunction::linear(0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)KFunction::tabulated({0.0, 1.0}, {0.0, -1.0}, 1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("closed_form_power basic values") {
    const auto phi = margin::closed_form_power(2.0, 1.0, 2.0);
    CHECK(phi.value(3.0) == doctest::Approx(18.0).epsilon(1e-14));  // eta (s/s0)^lambda
    CHECK(phi.value(1.0) == doctest::Approx(2.0).epsilon(1e-14));   // value(s0) = eta
    CHECK(phi.value(0.0) == 0.0);
    CHECK_THROWS_AS((void)margin::closed_form_power(1.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)margin::closed_form_power(1.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("closed_form_power lambda=1/2 matches the RK45 oracle") {
    const auto phi = margin::closed_form_power(1.0, 1.0, 0.5);
    CHECK(phi.value(4.0) == doctest::Approx(2.0).epsilon(1e-14));
    const auto p = linear_problem(0.5, 1.0, 0.0, 1.0, 1.0);
    CHECK(phi.value(4.0) == doctest::Approx(rk45_solution(p, 4.0)).epsilon(1e-8));
}

TEST_CASE("closed_form_linear_r log branch value 2e") {
    const auto phi = margin::closed_form_linear_r(1.0, 1.0, 1.0, 1.0, 1.0);
    const double e = std::exp(1.0);
    CHECK(phi.value(e) == doctest::Approx(2.0 * e).epsilon(1e-14));
    CHECK(phi.value(1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("closed_form_linear_r degenerates to the power law at c_r=0") {
    const auto a = margin::closed_form_linear_r(1.5, 2.0, 3.0, 2.0, 0.0);
    const auto b = margin::closed_form_power(1.5, 2.0, 1.5);
    for (double s = 0.0; s <= 10.0; s += 0.25)
        CHECK(a.value(s) == doctest::Approx(b.value(s)).epsilon(1e-14));
}

TEST_CASE("closed_form_linear_r lambda=2 branch matches RK45") {
    const auto phi = margin::closed_form_linear_r(0.0, 1.0, 2.0, 1.0, 1.0);
    const auto p = linear_problem(2.0, 1.0, 1.0, 1.0, 0.0);
    CHECK(phi.value(2.0) == doctest::Approx(rk45_solution(p, 2.0)).epsilon(1e-8));
}

TEST_CASE("closed forms match the RK oracle across the contract grid") {
    // lambda in {0.5, 1, 2}, c_r in {0, 0.3}, on [s0, 20 s0]
    for (const double lambda : {0.5, 1.0, 2.0}) {
        for (const double c_r : {0.0, 0.3}) {
            const double s0 = 1.0;
            const double eta = 1.0;
            const auto p = linear_problem(lambda, 1.0, c_r, s0, eta);
            const auto phi = margin::closed_form_linear_r(eta, s0, lambda, 1.0, c_r);
            for (double s = s0; s <= 20.0 * s0; s += 1.9) {
                const double want = rk45_solution(p, s);
                CHECK(phi.value(s) ==
                      doctest::Approx(want).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("integrate_comparison_ode reproduces the linear case") {
    const auto p = linear_problem(1.0, 1.0, 0.0, 1.0, 2.0);
    const auto tab = margin::integrate_comparison_ode(p, 5.0, 0.002);
    for (double s = 1.0; s <= 5.0; s += 0.37)
        CHECK(tab.value(s) == doctest::Approx(2.0 * s).epsilon(1e-8));
    CHECK(tab.value(1.0) == doctest::Approx(2.0).epsilon(1e-12));  // s = s0 -> eta
}

TEST_CASE("integrate_comparison_ode is 4th order under step halving") {
    const auto p = linear_problem(0.5, 1.0, 0.0, 1.0, 1.0);
    const auto exact = [](double s) { return std::sqrt(s); };
    const auto err = [&](double step) {
        const auto tab = margin::integrate_comparison_ode(p, 9.0, step);
        return std::abs(tab.value(9.0) - exact(9.0));
    };
    const double e1 = err(0.2);
    const double e2 = err(0.1);
    const double ratio = e1 / e2;
    CHECK(ratio > 10.0);
    CHECK(ratio < 24.0);
}

TEST_CASE("integrate_comparison_ode aborts on blow-up") {
    ComparisonProblem p;
    p.alpha_b = KFunction::power_law(1.0, 3.0);  // superlinear growth
    p.alpha_v = KFunction::linear(0.01);
    p.s0 = 1.0;
    p.eta = 10.0;
    CHECK_THROWS_WITH_AS((void)margin::integrate_comparison_ode(p, 400.0, 0.05),
                         doctest::Contains("blow-up"), std::runtime_error);
}

TEST_CASE("picard first iterate reproduces the quadrature value") {
    // y1(s) = eta + int_{s0}^{s} (alpha_b(eta) + 0) / alpha_v(tau) dtau = 1 + log s
    const auto p = linear_problem(1.0, 1.0, 0.0, 1.0, 1.0);
    const auto res = margin::picard_solve(p, 2.0, 1e30, 1, 4097);
    CHECK(res.iterations == 1);
    CHECK(res.margin.value(2.0) == doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("picard converges to the closed form on linear problems") {
    for (const double lambda : {0.5, 1.0, 2.0}) {
        const auto p = linear_problem(lambda, 1.0, 0.0, 1.0, 1.0);
        const auto res = margin::picard_solve(p, 2.0, 1e-8, 50, 512);
        CHECK(res.iterations <= 50);
        const auto phi = margin::closed_form_power(1.0, 1.0, lambda);
        for (double s = 1.0; s <= 2.0; s += 0.1)
            CHECK(res.margin.value(s) == doctest::Approx(phi.value(s)).epsilon(1e-6));
    }
}

TEST_CASE("picard reports non-convergence") {
    const auto p = linear_problem(2.0, 1.0, 0.0, 1.0, 1.0);
    CHECK_THROWS_WITH_AS((void)margin::picard_solve(p, 2.0, 1e-12, 2, 256),
                         doctest::Contains("did not converge"), std::runtime_error);
}

TEST_CASE("separated solution: linear rates give the scaling family") {
    // alpha_b = alpha_v linear: F = G = log, y = eta s / s0
    const auto p = linear_problem(1.0, 1.0, 0.0, 1.0, 0.7);
    const auto tab = margin::separated_solution(p, 6.0, 0.5, 0.5, 257);
    for (double s = 1.0; s <= 6.0; s += 0.5)
        CHECK(tab.value(s) == doctest::Approx(0.7 * s).epsilon(1e-9));
    CHECK(tab.value(1.0) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("separated solution: alpha_b = s, alpha_v = 2s is the half power") {
    const auto p = linear_problem(1.0, 2.0, 0.0, 1.0, 1.0);
    const auto tab = margin::separated_solution(p, 9.0, 1.0, 1.0, 257);
    const auto phi = margin::closed_form_power(1.0, 1.0, 0.5);
    for (double s = 1.0; s <= 9.0; s += 0.4)
        CHECK(tab.value(s) == doctest::Approx(phi.value(s)).epsilon(1e-6));
}

TEST_CASE("separated solution agrees with the RK tabulation and rejects eta=0") {
    ComparisonProblem p;
    p.alpha_b = KFunction::power_law(1.0, 1.5);
    p.alpha_v = KFunction::linear(2.0);
    p.s0 = 1.0;
    p.eta = 0.5;
    const auto sep = margin::separated_solution(p, 4.0, 0.5, 1.0, 257);
    const auto ode = margin::integrate_comparison_ode(p, 4.0, 0.001);
    for (double s = 1.0; s <= 4.0; s += 0.2)
        CHECK(sep.value(s) == doctest::Approx(ode.value(s)).epsilon(1e-6));

    p.eta = 0.0;
    CHECK_THROWS_WITH_AS((void)margin::separated_solution(p, 4.0, 0.5, 1.0, 257),
                         doctest::Contains("eta = 0"), std::invalid_argument);
}

TEST_CASE("verify_margin_inequality: ODE solution sits at equality") {
    const auto p = linear_problem(1.0, 1.0, 0.3, 1.0, 1.0);
    const auto tab = margin::integrate_comparison_ode(p, 5.0, 0.002);
    const auto rep =
        margin::verify_margin_inequality(tab, p.alpha_b, p.alpha_v, p.r, 1.0, 5.0, 500, 1e-6);
    CHECK(rep.pass);
    CHECK(std::abs(rep.min_residual) <= 1e-6);
}

TEST_CASE("verify_margin_inequality: doubled margin passes, halved fails") {
    const auto p = linear_problem(1.0, 1.0, 0.0, 1.0, 1.0);
    const auto doubled = margin::closed_form_power(2.0, 1.0, 1.0);
    const auto halved = margin::closed_form_power(0.5, 1.0, 1.0);
    // For linear alpha_b the scaled family stays exactly on the inequality,
    // so push the doubled case with a slightly larger exponent for slack.
    const auto doubled_rep = margin::verify_margin_inequality(doubled, p.alpha_b, p.alpha_v, p.r,
                                                              1.0, 10.0, 500);
    CHECK(doubled_rep.pass);

    const auto failing = margin::closed_form_power(0.5, 1.0, 0.8);
    const auto fail_rep = margin::verify_margin_inequality(failing, p.alpha_b, p.alpha_v, p.r,
                                                           1.0, 10.0, 500);
    CHECK_FALSE(fail_rep.pass);
    (void)halved;
}

TEST_CASE("verify_margin_inequality requires a dense grid") {
    const auto phi = margin::closed_form_power(1.0, 1.0, 1.0);
    CHECK_THROWS_AS((void)margin::verify_margin_inequality(phi, KFunction::linear(1.0),
                                                           KFunction::linear(1.0),
                                                           KFunction::zero(), 0.0, 1.0, 10),
                    std::invalid_argument);
}

TEST_CASE("linear_phi_residual sign logic") {
    const auto a = margin::linear_phi_residual(1.0, 1.0, 2.0);
    CHECK(a.c_r == doctest::Approx(1.0));
    CHECK(a.valid_class_k);

    const auto degenerate = margin::linear_phi_residual(1.0, 2.0, 2.0);
    CHECK(degenerate.c_r == doctest::Approx(0.0));
    CHECK_FALSE(degenerate.valid_class_k);

    const auto invalid = margin::linear_phi_residual(2.0, 3.0, 1.0);
    CHECK(invalid.c_r == doctest::Approx(-4.0));
    CHECK_FALSE(invalid.valid_class_k);
}

TEST_CASE("linear phi with matched residual satisfies the identity exactly") {
    const double c_phi = 1.3;
    const double c_b = 1.0;
    const double c_v = 2.5;
    const auto lr = margin::linear_phi_residual(c_phi, c_b, c_v);
    REQUIRE(lr.valid_class_k);
    const auto phi = margin::closed_form_power(c_phi, 1.0, 1.0);  // c_phi * s
    const auto rep = margin::verify_margin_inequality(
        phi, KFunction::linear(c_b), KFunction::linear(c_v), KFunction::linear(lr.c_r), 0.0,
        10.0, 1000, 1e-12);
    CHECK(rep.pass);
    CHECK(std::abs(rep.min_residual) <= 1e-12);
}

TEST_CASE("pointwise minimality: candidate families above the solution") {
    const auto p = linear_problem(1.0, 1.0, 0.0, 1.0, 1.0);

    SUBCASE("the solution itself") {
        const auto y = margin::integrate_comparison_ode(p, 4.0, 0.002);
        const auto rep = margin::pointwise_minimality_check(y, p, 4.0, 400, 1e-6);
        CHECK(rep.precondition_met);
        CHECK(rep.pass);
        CHECK(std::abs(rep.min_gap) <= 1e-6);
    }
    SUBCASE("additive offset stays above even though the slope test fails") {
        auto base = margin::integrate_comparison_ode(p, 4.0, 0.002);
        std::vector<double> s, y, yp;
        for (double t = 1.0; t <= 4.0; t += 0.01) {
            s.push_back(t);
            y.push_back(base.value(t) + 0.1);
            yp.push_back(base.derivative(t));
        }
        const auto shifted = MarginFunction::tabulated(s, y, yp);
        const auto rep = margin::pointwise_minimality_check(shifted, p, 4.0, 300);
        CHECK(rep.pass);  // stays above y
        CHECK_FALSE(rep.precondition_met);
        CHECK(rep.note.find("precondition") != std::string::npos);
    }
    SUBCASE("scaled-up solution satisfies the precondition and dominates") {
        const auto scaled = margin::closed_form_power(1.5, 1.0, 1.0);
        const auto rep = margin::pointwise_minimality_check(scaled, p, 4.0, 300);
        CHECK(rep.precondition_met);
        CHECK(rep.pass);
    }
}

TEST_CASE("comparison theorem: inequality-satisfying candidates dominate the solution") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const double c_b = rng.uniform(0.4, 2.0);
        const double c_v = rng.uniform(0.4, 2.0);
        const double c_r = trial % 2 == 0 ? 0.0 : rng.uniform(0.05, 0.5);
        const double eta = rng.uniform(0.2, 2.0);
        const auto p = linear_problem(c_b, c_v, c_r, 1.0, eta);

        // Candidate: solve with inflated alpha_b and raised eta; both changes
        // keep the margin inequality satisfied for the original rates.
        ComparisonProblem inflated = p;
        const double k = rng.uniform(1.0, 1.8);
        inflated.alpha_b = KFunction::linear(c_b * k);
        inflated.eta = eta + rng.uniform(0.0, 0.5);
        const auto candidate = margin::integrate_comparison_ode(inflated, 3.0, 0.001);

        const auto verify = margin::verify_margin_inequality(candidate, p.alpha_b, p.alpha_v,
                                                             p.r, 1.0, 3.0, 400, 1e-6);
        REQUIRE(verify.pass);

        const auto y = margin::integrate_comparison_ode(p, 3.0, 0.001);
        for (double s = 1.0; s <= 3.0; s += 0.05)
            CHECK(candidate.value(s) >= y.value(s) - 1e-9);
    }
}

TEST_CASE("margin derivative matches central finite differences") {
    Rng rng(29);
    const auto p = linear_problem(1.3, 0.9, 0.2, 1.0, 0.8);
    const std::vector<MarginFunction> phis{
        margin::closed_form_power(1.0, 1.0, 1.7),
        margin::closed_form_linear_r(0.8, 1.0, 1.3, 0.9, 0.2),
        margin::closed_form_linear_r(1.0, 1.0, 1.0, 1.0, 0.5),  // log branch
        margin::integrate_comparison_ode(p, 6.0, 0.001),
    };
    for (const auto& phi : phis) {
        for (int i = 0; i < 100; ++i) {
            const double s = rng.uniform(1.05, 5.5);
            const double fd =
                oracle::central_diff([&](double x) { return phi.value(x); }, s, 1e-6);
            CHECK(phi.derivative(s) ==
                  doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("closed forms stay class-K-infinity on the sampled range") {
    CHECK(margin::closed_form_power(1.0, 1.0, 0.5).is_class_k_on(0.0, 20.0));
    CHECK(margin::closed_form_power(1.0, 1.0, 2.0).is_class_k_on(0.0, 20.0));
    CHECK(margin::closed_form_linear_r(1.0, 1.0, 0.5, 1.0, 0.3).is_class_k_on(0.0, 20.0));
    // For lambda > 1 with a nonzero residual the formula solves the ODE on all
    // of (0, inf) but dips negative below s0, and no class-K extension to
    // [0, s0) exists there (the linear-margin corollary needs c_v > c_b). The
    // sampled class-K property is therefore owed only on the ODE's own domain.
    const auto steep = margin::closed_form_linear_r(1.0, 1.0, 2.0, 1.0, 0.3);
    CHECK(steep.is_class_k_on(1.0, 20.0));
    CHECK_FALSE(steep.is_class_k_on(0.0, 20.0));
}

}  // TEST_SUITE
