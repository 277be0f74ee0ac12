// Static equilibrium at the terminal time. With a quadratic terminal payoff
// Psi the terminal value function is E[Psi(ahat_T)] under the leader's
// information, which feeds back into the terminal first-order condition; the
// builder solves the resulting fixed point by damped iteration.

#include <cmath>

#include "lme/fields.hpp"

namespace lme {

namespace {

constexpr double kTol = 1e-12;
constexpr int kMaxIter = 500;
constexpr double kDamping = 0.5;
constexpr double kLoadingFloor = 1e-12;

TerminalState interior_terminal(const PayoffSpec& sp,
                                const TerminalPayoffSpec& term, double gT,
                                double chiT, const GameParams& pp) {
    const double sy2 = pp.sigma_y * pp.sigma_y;
    const double p0 = term.psi0 / sp.scale_u;
    const double p1 = term.psi1 / sp.scale_u;
    const double p2 = term.psi2 / sp.scale_u;

    const TerminalCoefficients tc = terminal_coefficients(sp, chiT);
    std::array<double, 4> b = tc.beta;

    double resid = 0.0;
    MyopicResponse d{tc.delta[0], tc.delta[1], tc.delta[2]};
    double v2n = 0.0, v5n = 0.0, v9n = 0.0;
    bool converged = term.zero();
    for (int it = 0; it < kMaxIter && !converged; ++it) {
        const double a2 = b[2] + b[1] * (1.0 - chiT);
        const double a3 = b[3] + b[1] * chiT;
        if (std::abs(a3) < kLoadingFloor) {
            throw DegenerateTerminal("terminal type loading vanishes");
        }
        d = myopic_response(sp, b[0], a2, a3);
        const double kY = gT * a3 / sy2;
        v2n = p1 * d.delta1 + 2.0 * p2 * d.delta0 * d.delta1;
        v5n = p2 * d.delta1 * d.delta1;
        v9n = 2.0 * p2 * d.delta1 * d.delta2;
        const std::array<double, 4> nb = {
            sp.u0 + sp.u_ahata * d.delta0 + kY * v2n,
            sp.u_ahata * d.delta1 + 2.0 * kY * v5n,
            sp.u_ahata * d.delta2 + kY * v9n,
            sp.u_atheta,
        };
        resid = 0.0;
        for (int i = 0; i < 4; ++i) resid = std::max(resid, std::abs(nb[i] - b[i]));
        if (resid < kTol) {
            b = nb;
            converged = true;
            break;
        }
        for (int i = 0; i < 4; ++i) b[i] += kDamping * (nb[i] - b[i]);
    }
    if (!converged) {
        throw NoStaticEquilibrium(
            "terminal fixed point did not converge", resid);
    }

    const double a2 = b[2] + b[1] * (1.0 - chiT);
    const double a3 = b[3] + b[1] * chiT;
    d = myopic_response(sp, b[0], a2, a3);
    v2n = p1 * d.delta1 + 2.0 * p2 * d.delta0 * d.delta1;
    v5n = p2 * d.delta1 * d.delta1;
    v9n = 2.0 * p2 * d.delta1 * d.delta2;

    TerminalState out;
    out.beta = b;
    out.delta = {d.delta0, d.delta1, d.delta2};
    out.v[0] = sp.scale_u * (p0 + p1 * d.delta0 +
                             p2 * (d.delta0 * d.delta0 +
                                   d.delta1 * d.delta1 * gT * chiT));
    out.v[2] = sp.scale_u * v2n;
    out.v[3] = sp.scale_u * (p1 * d.delta2 + 2.0 * p2 * d.delta0 * d.delta2);
    out.v[5] = sp.scale_u * v5n;
    out.v[6] = sp.scale_u * (p2 * d.delta2 * d.delta2);
    out.v[9] = sp.scale_u * v9n;
    return out;
}

TerminalState nofeedback_terminal(const PayoffSpec& sp,
                                  const TerminalPayoffSpec& term, double gT,
                                  double chiT, const GameParams& pp) {
    const double sy2 = pp.sigma_y * pp.sigma_y;
    const double mu = pp.mu;
    const double p0 = term.psi0 / sp.scale_u;
    const double p1 = term.psi1 / sp.scale_u;
    const double p2 = term.psi2 / sp.scale_u;
    const double uu = sp.u_ahata * sp.uhat_hataa;

    // zero-terminal-payoff start: beta1/beta3 as in the interior closed form,
    // beta0 as the absolute intercept carrying the prior mean
    const TerminalCoefficients tc = terminal_coefficients(sp, chiT);
    double b0 = (sp.u0 + sp.u_ahata * (sp.uhat0 + sp.uhat_hataa * tc.beta[1] *
                                                      (1.0 - chiT) * mu)) /
                (1.0 - uu);
    double b1 = tc.beta[1];
    double b3 = tc.beta[3];

    double resid = 0.0;
    bool converged = term.zero();
    for (int it = 0; it < kMaxIter && !converged; ++it) {
        const double a3 = b3 + b1 * chiT;
        if (std::abs(a3) < kLoadingFloor) {
            throw DegenerateTerminal("terminal type loading vanishes");
        }
        const double conj0 = b0 + b1 * (1.0 - chiT) * mu;
        const double d0 = sp.uhat0 + sp.uhat_hataa * conj0;
        const double dm = sp.uhat_hatatheta + sp.uhat_hataa * a3;
        const double kY = gT * a3 / sy2;
        const double w2n = p1 * dm + 2.0 * p2 * d0 * dm;
        const double w4n = p2 * dm * dm;
        const double nb0 = sp.u0 + sp.u_ahata * d0 + kY * w2n;
        const double nb1 = sp.u_ahata * dm + 2.0 * kY * w4n;
        const double nb3 = sp.u_atheta;
        resid = std::max({std::abs(nb0 - b0), std::abs(nb1 - b1),
                          std::abs(nb3 - b3)});
        if (resid < kTol) {
            b0 = nb0;
            b1 = nb1;
            b3 = nb3;
            converged = true;
            break;
        }
        b0 += kDamping * (nb0 - b0);
        b1 += kDamping * (nb1 - b1);
        b3 += kDamping * (nb3 - b3);
    }
    if (!converged) {
        throw NoStaticEquilibrium(
            "terminal fixed point did not converge", resid);
    }

    const double a3 = b3 + b1 * chiT;
    const double conj0 = b0 + b1 * (1.0 - chiT) * mu;
    const double d0 = sp.uhat0 + sp.uhat_hataa * conj0;
    const double dm = sp.uhat_hatatheta + sp.uhat_hataa * a3;

    TerminalState out;
    out.beta = {b0, b1, 0.0, b3};
    // generic decomposition: ahat = delta0 + delta1 Mhat + delta2 L with the
    // prior mean frozen into the L slot
    const MyopicResponse d =
        myopic_response(sp, b0, b1 * (1.0 - chiT), a3);
    out.delta = {d.delta0, d.delta1, d.delta2};
    out.v[0] = sp.scale_u *
               (p0 + p1 * d0 + p2 * (d0 * d0 + dm * dm * gT * chiT));
    out.v[2] = sp.scale_u * (p1 * dm + 2.0 * p2 * d0 * dm);
    out.v[5] = sp.scale_u * (p2 * dm * dm);
    return out;
}

TerminalState public_terminal(const PayoffSpec& sp,
                              const TerminalPayoffSpec& term, double gT,
                              const GameParams& pp) {
    const double sy2 = pp.sigma_y * pp.sigma_y;
    const double p0 = term.psi0 / sp.scale_u;
    const double p1 = term.psi1 / sp.scale_u;
    const double p2 = term.psi2 / sp.scale_u;
    const double uu = sp.u_ahata * sp.uhat_hataa;

    double b3 = sp.u_atheta;
    if (std::abs(b3) < kLoadingFloor) {
        throw DegenerateTerminal("terminal type loading vanishes");
    }
    // zero-terminal-payoff start: the myopic reply sees the total weight
    // beta1 + beta3, so beta1 solves its own fixed point even statically
    double b1 = sp.u_ahata * (sp.uhat_hatatheta + sp.uhat_hataa * sp.u_atheta) /
                (1.0 - uu);
    double b0 = (sp.u0 + sp.u_ahata * sp.uhat0) / (1.0 - uu);

    double resid = 0.0;
    bool converged = term.zero();
    for (int it = 0; it < kMaxIter && !converged; ++it) {
        const double D = b1 + b3;
        const double d0 = sp.uhat0 + sp.uhat_hataa * b0;
        const double dm = sp.uhat_hatatheta + sp.uhat_hataa * D;
        const double kY = gT * b3 / sy2;
        const double w2n = p1 * dm + 2.0 * p2 * d0 * dm;
        const double w4n = p2 * dm * dm;
        const double nb0 = sp.u0 + sp.u_ahata * d0 + kY * w2n;
        const double nb1 = sp.u_ahata * dm + 2.0 * kY * w4n;
        const double nb3 = sp.u_atheta;
        resid = std::max({std::abs(nb0 - b0), std::abs(nb1 - b1),
                          std::abs(nb3 - b3)});
        if (resid < kTol) {
            b0 = nb0;
            b1 = nb1;
            b3 = nb3;
            converged = true;
            break;
        }
        b0 += kDamping * (nb0 - b0);
        b1 += kDamping * (nb1 - b1);
        b3 += kDamping * (nb3 - b3);
    }
    if (!converged) {
        throw NoStaticEquilibrium(
            "terminal fixed point did not converge", resid);
    }

    const double d0 = sp.uhat0 + sp.uhat_hataa * b0;
    const double dm = sp.uhat_hatatheta + sp.uhat_hataa * (b1 + b3);

    TerminalState out;
    out.beta = {b0, b1, 0.0, b3};
    out.delta = {d0, sp.uhat_hatatheta + sp.uhat_hataa * b3,
                 sp.uhat_hataa * b1};
    out.v[0] = sp.scale_u * (p0 + p1 * d0 + p2 * d0 * d0);
    out.v[2] = sp.scale_u * (p1 * dm + 2.0 * p2 * d0 * dm);
    out.v[5] = sp.scale_u * (p2 * dm * dm);
    return out;
}

}  // namespace

TerminalState terminal_state_builder(const PayoffSpec& spec,
                                     const TerminalPayoffSpec& term,
                                     double gamma_T, double chi_T,
                                     const GameParams& params) {
    switch (params.sigma_x.kind) {
        case SigmaX::Kind::finite:
            return interior_terminal(spec, term, gamma_T, chi_T, params);
        case SigmaX::Kind::infinite:
            return nofeedback_terminal(spec, term, gamma_T, chi_T, params);
        case SigmaX::Kind::zero:
            return public_terminal(spec, term, gamma_T, params);
    }
    throw ConfigError("unknown sigma_x regime");
}

std::array<double, 5> tilde_terminal_map(const PayoffSpec& spec,
                                         const TerminalPayoffSpec& term,
                                         double gamma_T, double chi_T,
                                         const GameParams& params) {
    const TerminalState ts =
        terminal_state_builder(spec, term, gamma_T, chi_T, params);
    const double omc = 1.0 - chi_T;
    return {ts.v[6] * gamma_T / (omc * omc), ts.v[8] * gamma_T / omc,
            ts.beta[1], ts.beta[2] / omc, ts.beta[3]};
}

}  // namespace lme
