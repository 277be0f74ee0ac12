#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lme/learning.hpp"
#include "lme/odeint.hpp"

using namespace lme;

namespace {
GameParams interior(double sx, double sy) {
    GameParams p;
    p.sigma_x = SigmaX::finite(sx);
    p.sigma_y = sy;
    return p;
}
}  // namespace

TEST_CASE("learning_rhs: frozen interior values") {
    // state/parameter point chosen with small rationals; derivatives frozen
    // from an exact-arithmetic evaluation of the filtering ODEs
    LearningState st{0.7, 0.25};
    const auto rhs = learning_rhs(st, 0.3, 0.4, 0.55, interior(1.2, 1.25));
    CHECK(rhs.dgamma == doctest::Approx(-0.070756).epsilon(1e-14));
    CHECK(rhs.dchi == doctest::Approx(0.066619461805555556).epsilon(1e-14));
}

TEST_CASE("learning_rhs: textbook variance decay at chi = 0") {
    LearningState st{1.0, 0.0};
    const auto rhs = learning_rhs(st, 0.3, 0.5, 0.0, interior(1.0, 1.5));
    CHECK(rhs.dgamma == doctest::Approx(-0.25 / 2.25).epsilon(1e-14));
}

TEST_CASE("learning_rhs: zero signaling freezes gamma") {
    LearningState st{0.8, 0.3};
    const auto rhs = learning_rhs(st, 0.0, 0.0, 0.6, interior(1.0, 1.0));
    CHECK(rhs.dgamma == 0.0);
    CHECK(rhs.dchi == doctest::Approx(-0.8 * 0.09 * 0.36).epsilon(1e-14));
}

TEST_CASE("learning_rhs regimes: no-feedback drops the damping term") {
    LearningState st{0.7, 0.25};
    GameParams nf;
    nf.sigma_x = SigmaX::infinite();
    nf.sigma_y = 1.25;
    const auto rhs = learning_rhs(st, 0.3, 0.4, 0.55, nf);
    const double a3 = 0.4 + 0.3 * 0.25;
    CHECK(rhs.dchi == doctest::Approx(0.7 * a3 * a3 * 0.75 / (1.25 * 1.25)));
    GameParams pub;
    pub.sigma_x = SigmaX::zero();
    pub.sigma_y = 1.25;
    const auto prhs = learning_rhs(LearningState{0.7, 0.0}, 0.3, 0.4, 0.55, pub);
    CHECK(prhs.dchi == 0.0);
    CHECK(prhs.dgamma == doctest::Approx(-0.49 * 0.16 / (1.25 * 1.25)));
}

TEST_CASE("learning_rhs_general: frozen values at nu = 3/5") {
    GeneralLearningState st{0.7, 0.2, 0.3};
    GameParams p = interior(1.2, 1.25);
    p.nu = 0.6;
    const auto rhs = learning_rhs_general(st, 0.3, 0.4, 0.55, p);
    CHECK(rhs.dgamma1 == doctest::Approx(-0.10470761).epsilon(1e-14));
    CHECK(rhs.dgamma2 == doctest::Approx(-0.024382004444444444).epsilon(1e-13));
    CHECK(rhs.dchi == doctest::Approx(0.00404636).epsilon(1e-12));
}

TEST_CASE("learning_rhs_general reduces to learning_rhs at nu=0, gamma2=chi*gamma1") {
    const GameParams p = interior(0.9, 1.4);
    for (int i = 0; i < 100; ++i) {
        const double g = 0.05 + 0.9 * (i / 100.0);
        const double c = 0.9 * (i % 10) / 10.0;
        const double b1 = -0.4 + i * 0.01, b3 = 0.5, d1 = 0.3 + 0.004 * i;
        const auto full =
            learning_rhs_general(GeneralLearningState{g, c * g, c}, b1, b3, d1, p);
        const auto red = learning_rhs(LearningState{g, c}, b1, b3, d1, p);
        CHECK(full.dgamma1 == doctest::Approx(red.dgamma).epsilon(1e-14));
        CHECK(full.dchi == doctest::Approx(red.dchi).epsilon(1e-14));
    }
}

TEST_CASE("learning_rhs_general: gamma2 = chi*gamma1 is invariant at nu=0") {
    const GameParams p = interior(1.1, 1.3);
    auto field = [&](double, const std::vector<double>& x, std::vector<double>& dx) {
        const auto rhs = learning_rhs_general(
            GeneralLearningState{x[0], x[1], x[2]}, 0.25, 0.5, 0.5 + 0.25 * x[2], p);
        dx = {rhs.dgamma1, rhs.dgamma2, rhs.dchi};
    };
    const Path path = integrate(field, {1.0, 0.0, 0.0}, make_grid(0.0, 3.0));
    REQUIRE(path.completed());
    for (const auto& v : path.values)
        CHECK(std::abs(v[1] - v[2] * v[0]) < 1e-8);
}

TEST_CASE("chi_constants: golden-ratio point and frozen general point") {
    {
        const auto c = chi_constants(1.0, 1.0, 1.0);
        CHECK(c.c1 == doctest::Approx((std::sqrt(5.0) + 1.0) / 2.0).epsilon(1e-14));
        CHECK(c.c2 == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-14));
        CHECK(c.d == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
    }
    {
        const auto c = chi_constants(0.8, 2.0, 1.5);
        CHECK(c.c1 == doctest::Approx(3.5584026877518484).epsilon(1e-14));
        CHECK(c.c2 == doctest::Approx(0.78062490997407066).epsilon(1e-14));
        CHECK(c.d == doctest::Approx(1.5620499351813309).epsilon(1e-14));
        CHECK(chi_closed_form(0.6, c, 1.0) ==
              doctest::Approx(0.39056438609166941).epsilon(1e-14));
        // defining relation between the constants
        const double k = 1.5 * 1.5 * 0.64 / 4.0;
        CHECK(c.d == doctest::Approx(k * (c.c1 + c.c2)).epsilon(1e-12));
    }
}

TEST_CASE("chi_constants limits: c2 -> 0 (small sigma_X), -> 1 (large)") {
    CHECK(chi_constants(1.0, 1e-3, 1.0).c2 < 1e-2);
    CHECK(chi_constants(1.0, 1e3, 1.0).c2 > 1.0 - 1e-2);
    CHECK_THROWS_AS(chi_constants(0.0, 1.0, 1.0), ZeroSignalResponse);
}

TEST_CASE("chi_closed_form endpoints and monotonicity") {
    const auto c = chi_constants(1.0, 2.0, 1.5);
    CHECK(chi_closed_form(1.0, c, 1.0) == doctest::Approx(0.0));
    CHECK(chi_closed_form(1e-9, c, 1.0) == doctest::Approx(c.c2).epsilon(1e-6));
    double prev = -1.0;
    for (double g = 1.0; g > 0.01; g -= 0.01) {
        const double chi = chi_closed_form(g, c, 1.0);
        CHECK(chi > prev);
        prev = chi;
    }
}

TEST_CASE("closed form solves the chi-ODE along the joint trajectory") {
    // integrate (gamma, chi) jointly with delta1 = uhat_hataa * alpha3 and
    // compare chi against the closed form at every grid point
    for (double sx : {0.1, 1.0, 10.0}) {
        const GameParams p = interior(sx, 1.5);
        const auto cc = chi_constants(1.0, sx, p.sigma_y);
        auto field = [&](double, const std::vector<double>& x, std::vector<double>& dx) {
            const double alpha3 = 0.5 + 0.25 * x[1];  // beta3 + beta1*chi
            const auto rhs =
                learning_rhs(LearningState{x[0], x[1]}, 0.25, 0.5, alpha3, p);
            dx = {rhs.dgamma, rhs.dchi};
        };
        const Path path = integrate(field, {1.0, 0.0}, make_grid(0.0, 5.0));
        REQUIRE(path.completed());
        double sup = 0.0;
        for (const auto& v : path.values)
            sup = std::max(sup, std::abs(v[1] - chi_closed_form(v[0], cc, 1.0)));
        CHECK(sup < 1e-8);
    }
}

TEST_CASE("chi_no_feedback identity holds along any integrated path") {
    GameParams p;
    p.sigma_x = SigmaX::infinite();
    p.sigma_y = 1.0;
    auto field = [&](double t, const std::vector<double>& x, std::vector<double>& dx) {
        const double b1 = 0.2 + 0.05 * std::sin(t);  // arbitrary smooth inputs
        const auto rhs = learning_rhs(LearningState{x[0], x[1]}, b1, 0.6, 0.0, p);
        dx = {rhs.dgamma, rhs.dchi};
    };
    const Path path = integrate(field, {1.0, 0.0}, make_grid(0.0, 4.0));
    REQUIRE(path.completed());
    for (const auto& v : path.values)
        CHECK(v[1] == doctest::Approx(chi_no_feedback(v[0], 1.0)).epsilon(1e-9));
}

TEST_CASE("learning invariants hold along trajectories (bounded inputs)") {
    const GameParams p = interior(0.7, 1.2);
    auto field = [&](double t, const std::vector<double>& x, std::vector<double>& dx) {
        const double b1 = 0.4 * std::cos(t), b3 = 0.6, d1 = 0.8 * std::sin(t) + 1.0;
        const auto rhs = learning_rhs(LearningState{x[0], x[1]}, b1, b3, d1, p);
        dx = {rhs.dgamma, rhs.dchi};
    };
    const Path path = integrate(field, {1.0, 0.0}, make_grid(0.0, 8.0));
    REQUIRE(path.completed());
    for (const auto& v : path.values) {
        CHECK(v[0] > 0.0);
        CHECK(v[0] <= 1.0 + 1e-12);
        CHECK(v[1] >= -1e-12);
        CHECK(v[1] < 1.0);
    }
}

TEST_CASE("l_dynamics_coefficients: frozen and structural cases") {
    {
        const auto lc =
            l_dynamics_coefficients(LearningState{0.5, 0.4}, 0.1, 0.55, -0.2, 1.2);
        CHECK(lc.l0 == doctest::Approx(-0.012731481481481481).epsilon(1e-14));
        CHECK(lc.l1 == doctest::Approx(-0.044560185185185185).epsilon(1e-14));
        CHECK(lc.B == doctest::Approx(0.12731481481481481).epsilon(1e-14));
    }
    {
        const auto lc =
            l_dynamics_coefficients(LearningState{0.5, 0.4}, 0.0, 1.0, -0.2, 1.0);
        CHECK(lc.l0 == doctest::Approx(0.0));
        CHECK(lc.l1 == doctest::Approx(-0.2 * 0.8 / 0.6).epsilon(1e-14));
        CHECK(lc.B == doctest::Approx(0.2 / 0.6).epsilon(1e-14));
    }
    // chi = 0 or delta1 = 0: the public belief does not move
    const auto froz0 = l_dynamics_coefficients(LearningState{0.5, 0.0}, 1, 1, 1, 1.0);
    CHECK((froz0.l0 == 0.0 && froz0.l1 == 0.0 && froz0.B == 0.0));
    const auto froz1 = l_dynamics_coefficients(LearningState{0.5, 0.4}, 1, 0, 1, 1.0);
    CHECK((froz1.l0 == 0.0 && froz1.l1 == 0.0 && froz1.B == 0.0));
}
