#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lme/fields.hpp"

using namespace lme;

namespace {

doctest::Approx near(double v, double eps = 1e-12) {
    return doctest::Approx(v).epsilon(eps);
}

PayoffSpec generic_spec() {
    PayoffSpec s;
    s.u_atheta = 0.6;
    s.u_ahata = 0.4;
    s.u_hatahata = 0.1;
    s.u_thetatheta = -0.4;
    s.u_hatatheta = 0.2;
    s.u0 = 0.2;
    s.u_hat0 = 0.1;
    s.u_const = 1.0 / 6.0;
    s.uhat_hatatheta = 0.4;
    s.uhat_hataa = 0.8;
    s.uhat0 = 0.1;
    s.scale_u = 3.0;
    s.scale_uhat = 2.5;
    return s;
}

GameParams interior_params(double sy) {
    GameParams p;
    p.sigma_x = SigmaX::finite(1.0);
    p.sigma_y = sy;
    return p;
}

}  // namespace

TEST_CASE("zero terminal payoff reduces to the static coefficients") {
    const PayoffSpec sp = generic_spec();
    const TerminalState ts =
        terminal_state_builder(sp, TerminalPayoffSpec{}, 0.7, 0.25,
                               interior_params(1.0));
    const TerminalCoefficients tc = terminal_coefficients(sp, 0.25);
    for (int i = 0; i < 4; ++i) CHECK(ts.beta[i] == near(tc.beta[i]));
    for (int i = 0; i < 3; ++i) CHECK(ts.delta[i] == near(tc.delta[i]));
    for (int i = 0; i < 10; ++i) CHECK(ts.v[i] == 0.0);
}

TEST_CASE("leadership with a quadratic terminal payoff: frozen values") {
    const PayoffSpec sp = payoff_sets::leadership();
    TerminalPayoffSpec term;
    term.psi0 = 0.1;
    term.psi1 = -0.2;
    term.psi2 = -0.3;
    const TerminalState ts =
        terminal_state_builder(sp, term, 0.5, 0.25, interior_params(1.5));
    CHECK(ts.beta[0] == near(-0.0070588724214949129, 1e-10));
    CHECK(ts.beta[1] == near(0.27867163809667177, 1e-10));
    CHECK(ts.beta[2] == near(0.20015174463884349, 1e-10));
    CHECK(ts.beta[3] == near(0.5));
    CHECK(ts.delta[0] == near(-0.0070588724214949129, 1e-10));
    CHECK(ts.delta[1] == near(0.56966790952416794, 1e-10));
    CHECK(ts.delta[2] == near(0.40915547321134732, 1e-10));
    CHECK(ts.v[0] == near(0.089227268912528765, 1e-10));
    CHECK(ts.v[2] == near(-0.11152085404726310, 1e-10));
    CHECK(ts.v[3] == near(-0.080098188870696296, 1e-10));
    CHECK(ts.v[5] == near(-0.097356458142490678, 1e-10));
    CHECK(ts.v[6] == near(-0.050222460377640466, 1e-10));
    CHECK(ts.v[9] == near(-0.13984964585680795, 1e-10));
    CHECK(ts.v[1] == 0.0);
    CHECK(ts.v[4] == 0.0);
    CHECK(ts.v[7] == 0.0);
    CHECK(ts.v[8] == 0.0);
}

TEST_CASE("terminal fixed point satisfies both optimality conditions") {
    const PayoffSpec sp = generic_spec();
    const GameParams pp = interior_params(1.3);
    TerminalPayoffSpec term;
    term.psi0 = -0.1;
    term.psi1 = 0.15;
    term.psi2 = -0.4;
    const double gT = 0.6, chiT = 0.35;
    const TerminalState ts = terminal_state_builder(sp, term, gT, chiT, pp);
    const double a2 = ts.beta[2] + ts.beta[1] * (1.0 - chiT);
    const double a3 = ts.beta[3] + ts.beta[1] * chiT;
    const MyopicResponse d = myopic_response(sp, ts.beta[0], a2, a3);
    CHECK(ts.delta[0] == near(d.delta0));
    CHECK(ts.delta[1] == near(d.delta1));
    CHECK(ts.delta[2] == near(d.delta2));
    const double kY = gT * a3 / (pp.sigma_y * pp.sigma_y);
    const double sc = sp.scale_u;
    CHECK(ts.beta[0] ==
          near(sp.u0 + sp.u_ahata * d.delta0 + kY * ts.v[2] / sc, 1e-10));
    CHECK(ts.beta[1] ==
          near(sp.u_ahata * d.delta1 + 2.0 * kY * ts.v[5] / sc, 1e-10));
    CHECK(ts.beta[2] ==
          near(sp.u_ahata * d.delta2 + kY * ts.v[9] / sc, 1e-10));
    CHECK(ts.beta[3] == near(sp.u_atheta));
    // terminal value coefficients restate E[Psi(ahat_T)]
    CHECK(ts.v[0] == near(term.psi0 + term.psi1 * d.delta0 +
                              term.psi2 * (d.delta0 * d.delta0 +
                                           d.delta1 * d.delta1 * gT * chiT),
                          1e-10));
    CHECK(ts.v[6] == near(term.psi2 * d.delta2 * d.delta2, 1e-10));
}

TEST_CASE("reputation terminal weight matches the closed form") {
    const PayoffSpec sp = payoff_sets::reputation();
    TerminalPayoffSpec term;
    term.psi2 = -1.125;  // Psi(ahat) = -psi * ahat^2 with psi = 0.5*sigma_y^2/gamma0
    GameParams pp = interior_params(1.5);
    const TerminalState ts = terminal_state_builder(sp, term, 0.6, 0.4, pp);
    CHECK(ts.beta[1] == near(-0.26785714285714286, 1e-11));  // -15/56
    CHECK(ts.beta[3] == near(1.0));
    // closed form: beta1 = -psi*gammaT / (sigma_y^2 + psi*gammaT*chiT)
    const double psi = 1.125;
    CHECK(ts.beta[1] ==
          near(-psi * 0.6 / (1.5 * 1.5 + psi * 0.6 * 0.4), 1e-11));
}

TEST_CASE("public reputation terminal weight") {
    const PayoffSpec sp = payoff_sets::reputation();
    TerminalPayoffSpec term;
    term.psi2 = -1.125;
    GameParams pp;
    pp.sigma_x = SigmaX::zero();
    pp.sigma_y = 1.5;
    const TerminalState ts = terminal_state_builder(sp, term, 0.6, 0.0, pp);
    CHECK(ts.beta[1] == near(-1.125 * 0.6 / 2.25, 1e-11));
    CHECK(ts.beta[2] == 0.0);
    CHECK(ts.beta[3] == near(1.0));
}

TEST_CASE("public leadership terminal: self-feedback through the public belief") {
    // the myopic reply sees beta1 + beta3, so beta1 solves
    // beta1 = u_ahata*uhat_hataa*(beta1 + beta3) even with zero terminal payoff
    const PayoffSpec sp = payoff_sets::leadership();
    GameParams pp;
    pp.sigma_x = SigmaX::zero();
    pp.sigma_y = 1.0;
    const TerminalState ts =
        terminal_state_builder(sp, TerminalPayoffSpec{}, 0.8, 0.0, pp);
    CHECK(ts.beta[0] == near(0.0));
    CHECK(ts.beta[1] == near(0.5));
    CHECK(ts.beta[3] == near(0.5));
    CHECK(ts.delta[0] == near(0.0));
    // generic split: delta1 responds to beta3, delta2 to beta1
    CHECK(ts.delta[1] == near(0.5));
    CHECK(ts.delta[2] == near(0.5));
}

TEST_CASE("public terminal fixed point with a terminal payoff is consistent") {
    const PayoffSpec sp = payoff_sets::leadership();
    GameParams pp;
    pp.sigma_x = SigmaX::zero();
    pp.sigma_y = 1.2;
    TerminalPayoffSpec term;
    term.psi1 = 0.3;
    term.psi2 = -0.5;
    const double gT = 0.7;
    const TerminalState ts = terminal_state_builder(sp, term, gT, 0.0, pp);
    const double D = ts.beta[1] + ts.beta[3];
    const double d0 = sp.uhat0 + sp.uhat_hataa * ts.beta[0];
    const double dm = sp.uhat_hatatheta + sp.uhat_hataa * D;
    const double kY = gT * ts.beta[3] / (pp.sigma_y * pp.sigma_y);
    const double p1 = term.psi1 / sp.scale_u, p2 = term.psi2 / sp.scale_u;
    CHECK(ts.beta[0] == near(sp.u0 + sp.u_ahata * d0 +
                                 kY * (p1 * dm + 2.0 * p2 * d0 * dm),
                             1e-10));
    CHECK(ts.beta[1] ==
          near(sp.u_ahata * dm + 2.0 * kY * p2 * dm * dm, 1e-10));
    CHECK(ts.beta[3] == near(sp.u_atheta));
}

TEST_CASE("no-feedback terminal: prior mean enters the intercept") {
    const PayoffSpec sp = payoff_sets::leadership();
    GameParams pp;
    pp.sigma_x = SigmaX::infinite();
    pp.sigma_y = 1.0;
    pp.mu = 0.8;
    TerminalPayoffSpec term;
    term.psi2 = -0.4;
    const double gT = 0.5, chiT = 0.3;
    const TerminalState ts = terminal_state_builder(sp, term, gT, chiT, pp);
    CHECK(ts.beta[2] == 0.0);
    const double a3 = ts.beta[3] + ts.beta[1] * chiT;
    const double conj0 = ts.beta[0] + ts.beta[1] * (1.0 - chiT) * pp.mu;
    const double d0 = sp.uhat0 + sp.uhat_hataa * conj0;
    const double dm = sp.uhat_hatatheta + sp.uhat_hataa * a3;
    const double kY = gT * a3 / (pp.sigma_y * pp.sigma_y);
    const double p2 = term.psi2 / sp.scale_u;
    CHECK(ts.beta[0] ==
          near(sp.u0 + sp.u_ahata * d0 + kY * 2.0 * p2 * d0 * dm, 1e-10));
    CHECK(ts.beta[1] ==
          near(sp.u_ahata * dm + 2.0 * kY * p2 * dm * dm, 1e-10));
    // value intercept includes the residual variance of Mhat
    CHECK(ts.v[0] == near(term.psi2 * (d0 * d0 + dm * dm * gT * chiT), 1e-10));
}

TEST_CASE("no-feedback terminal at mu=0 with zero intercepts is odd in mu") {
    const PayoffSpec sp = payoff_sets::leadership();
    GameParams pp;
    pp.sigma_x = SigmaX::infinite();
    pp.sigma_y = 1.0;
    pp.mu = 0.0;
    TerminalPayoffSpec term;
    term.psi2 = -0.4;
    const TerminalState t0 =
        terminal_state_builder(sp, term, 0.5, 0.3, pp);
    CHECK(t0.beta[0] == near(0.0));
    pp.mu = 1.0;
    const TerminalState t1 = terminal_state_builder(sp, term, 0.5, 0.3, pp);
    pp.mu = -1.0;
    const TerminalState tm = terminal_state_builder(sp, term, 0.5, 0.3, pp);
    CHECK(t1.beta[0] == near(-tm.beta[0], 1e-11));
    CHECK(t1.beta[1] == near(tm.beta[1], 1e-11));
}

TEST_CASE("tilde terminal map: static values at chi_T = 0") {
    GameParams pp;
    pp.sigma_x = SigmaX::finite(1.0);
    pp.sigma_y = 1.5;
    const TerminalPayoffSpec none{};
    const auto s0 =
        tilde_terminal_map(payoff_sets::leadership_common(0.0), none, 0.4, 0.0, pp);
    CHECK(s0[0] == 0.0);
    CHECK(s0[1] == 0.0);
    CHECK(s0[2] == near(0.25));
    CHECK(s0[3] == near(0.25));
    CHECK(s0[4] == near(0.5));
    const auto sh =
        tilde_terminal_map(payoff_sets::leadership_common(0.5), none, 0.4, 0.0, pp);
    CHECK(sh[2] == near(0.375));
    CHECK(sh[3] == near(0.125));
    const auto s1 =
        tilde_terminal_map(payoff_sets::leadership_common(1.0), none, 0.4, 0.0, pp);
    CHECK(s1[2] == near(0.5));
    CHECK(std::abs(s1[3]) < 1e-14);
    const auto sc =
        tilde_terminal_map(payoff_sets::conflict_of_interest(), none, 0.4, 0.0, pp);
    CHECK(sc[2] == near(0.375));
    CHECK(sc[3] == near(1.125));
}

TEST_CASE("tilde terminal map: frozen values at chi_T = 0.35") {
    GameParams pp;
    pp.sigma_x = SigmaX::finite(1.0);
    pp.sigma_y = 1.5;
    const auto s = tilde_terminal_map(payoff_sets::leadership_common(0.5),
                                      TerminalPayoffSpec{}, 0.4, 0.35, pp);
    CHECK(s[2] == near(0.41095890410958904, 1e-13));  // 30/73
    CHECK(s[3] == near(0.13698630136986301, 1e-13));  // 10/73
    CHECK(s[4] == near(0.5));
}

TEST_CASE("degenerate terminal loading is reported") {
    PayoffSpec sp = payoff_sets::leadership();
    sp.u_atheta = 0.0;  // terminal beta3 = 0 and beta1 = 0: loading vanishes
    GameParams pp;
    pp.sigma_x = SigmaX::zero();
    pp.sigma_y = 1.0;
    CHECK_THROWS_AS(
        terminal_state_builder(sp, TerminalPayoffSpec{}, 0.5, 0.0, pp),
        DegenerateTerminal);
}
