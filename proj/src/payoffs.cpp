#include "lme/payoffs.hpp"

#include <cmath>

namespace lme {

namespace {
constexpr double kDegenerate = 1e-12;
}

PayoffSpec normalize_payoffs(const RawPayoffU& u, const RawPayoffUhat& uhat) {
    if (!(u.aa < 0.0))
        throw NonConcave("long-run payoff is not strictly concave in own action");
    if (!(uhat.hathat < 0.0))
        throw NonConcave("myopic payoff is not strictly concave in own action");

    PayoffSpec s;
    s.scale_u = -u.aa;
    s.scale_uhat = -uhat.hathat;

    s.u_atheta = u.atheta / s.scale_u;
    s.u_ahata = u.ahat / s.scale_u;
    s.u_hatahata = u.hathat / s.scale_u;
    s.u_hatatheta = u.hattheta / s.scale_u;
    s.u_thetatheta = u.thetatheta / s.scale_u;
    s.u0 = u.grad_a / s.scale_u;
    s.u_hat0 = u.grad_hat / s.scale_u;
    s.u_theta0 = u.grad_theta / s.scale_u;
    s.u_const = u.constant / s.scale_u;

    s.uhat_hataa = uhat.hata / s.scale_uhat;
    s.uhat_hatatheta = uhat.hattheta / s.scale_uhat;
    s.uhat0 = uhat.grad_hat / s.scale_uhat;
    return s;
}

AssumptionReport validate_assumptions(const PayoffSpec& spec) {
    AssumptionReport rep;
    rep.signaling_value =
        spec.u_atheta * (spec.u_atheta + spec.u_ahata * spec.uhat_hatatheta);
    rep.signaling_nontrivial = rep.signaling_value > 0.0;
    rep.myopic_responds =
        std::abs(spec.uhat_hatatheta) + std::abs(spec.uhat_hataa) != 0.0;
    rep.flow_coupling =
        std::abs(spec.u_ahata) + std::abs(spec.u_hatahata) != 0.0;
    rep.intersect_value = spec.u_ahata * spec.uhat_hataa;
    rep.responses_intersect = rep.intersect_value < 1.0;
    return rep;
}

MyopicResponse myopic_response(const PayoffSpec& spec, double alpha0,
                               double alpha2, double alpha3) {
    MyopicResponse d;
    d.delta0 = spec.uhat0 + spec.uhat_hataa * alpha0;
    d.delta1 = spec.uhat_hatatheta + spec.uhat_hataa * alpha3;
    d.delta2 = spec.uhat_hataa * alpha2;
    return d;
}

TerminalCoefficients terminal_coefficients(const PayoffSpec& spec, double chi_T) {
    const double den1 = 1.0 - spec.u_ahata * spec.uhat_hataa;
    const double den2 = 1.0 - spec.u_ahata * spec.uhat_hataa * chi_T;
    if (std::abs(den1) < kDegenerate || std::abs(den2) < kDegenerate)
        throw DegenerateTerminal("static best responses do not intersect");

    const double signal = spec.u_atheta * spec.uhat_hataa + spec.uhat_hatatheta;
    TerminalCoefficients out;
    out.beta[0] = (spec.u0 + spec.u_ahata * spec.uhat0) / den1;
    out.beta[1] = spec.u_ahata * signal / den2;
    out.beta[2] = spec.u_ahata * spec.u_ahata * spec.uhat_hataa * signal *
                  (1.0 - chi_T) / (den1 * den2);
    out.beta[3] = spec.u_atheta;

    const double alpha0 = out.beta[0];
    const double alpha2 = out.beta[2] + out.beta[1] * (1.0 - chi_T);
    const double alpha3 = out.beta[3] + out.beta[1] * chi_T;
    const MyopicResponse d = myopic_response(spec, alpha0, alpha2, alpha3);
    out.delta = {d.delta0, d.delta1, d.delta2};
    return out;
}

namespace payoff_sets {

PayoffSpec leadership() {
    RawPayoffU u;
    u.aa = -4.0;       // -(a-theta)^2 - (a-ahat)^2
    u.atheta = 2.0;
    u.ahat = 2.0;
    u.hathat = -2.0;
    u.thetatheta = -2.0;
    RawPayoffUhat uh;
    uh.hathat = -2.0;  // -(ahat-a)^2
    uh.hata = 2.0;
    return normalize_payoffs(u, uh);
}

PayoffSpec leadership_common(double lambda) {
    PayoffSpec s = leadership();
    // Uhat = -lambda(ahat-theta)^2 - (1-lambda)(ahat-a)^2: own curvature -2
    s.uhat_hatatheta = lambda;
    s.uhat_hataa = 1.0 - lambda;
    return s;
}

PayoffSpec conflict_of_interest() {
    PayoffSpec s = leadership();
    s.uhat_hatatheta = 0.0;
    s.uhat_hataa = 1.5;  // Uhat = -(ahat - 1.5a)^2
    return s;
}

PayoffSpec reputation() {
    RawPayoffU u;
    u.aa = -2.0;       // -(a-theta)^2
    u.atheta = 2.0;
    u.thetatheta = -2.0;
    RawPayoffUhat uh;
    uh.hathat = -2.0;  // -(ahat-theta)^2
    uh.hattheta = 2.0;
    return normalize_payoffs(u, uh);
}

}  // namespace payoff_sets
}  // namespace lme
