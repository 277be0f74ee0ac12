#pragma once
// Payoff primitives: normalized quadratic flow payoffs for both players,
// structural-assumption validation, the myopic player's linear best response,
// and the static (terminal-time) equilibrium coefficients.
//
// Normalization convention: each player's flow payoff is divided by the
// magnitude of the own-action second derivative, so the own-action quadratic
// coefficient is -1/2 exactly and every other coefficient becomes a ratio.
// Value-function outputs elsewhere are reported in raw payoff units via the
// stored scale factors.

#include <array>

#include "lme/errors.hpp"

namespace lme {

// sigma_X regime selector. The public (sigma_X = 0) and no-feedback
// (sigma_X = infinity) limits change the dimension of the belief state, so
// they are explicit sentinels rather than extreme floats.
struct SigmaX {
    enum class Kind { finite, zero, infinite };
    Kind kind = Kind::finite;
    double value = 1.0;  // meaningful only when kind == finite

    static SigmaX finite(double v) { return {Kind::finite, v}; }
    static SigmaX zero() { return {Kind::zero, 0.0}; }
    static SigmaX infinite() { return {Kind::infinite, 0.0}; }

    bool is_finite() const { return kind == Kind::finite; }
    bool is_zero() const { return kind == Kind::zero; }
    bool is_infinite() const { return kind == Kind::infinite; }
};

struct GameParams {
    SigmaX sigma_x = SigmaX::finite(1.0);
    double sigma_y = 1.0;
    double gamma0 = 1.0;  // prior variance of the type
    double r = 0.0;       // discount rate
    double T = 1.0;       // horizon
    double mu = 0.0;      // prior mean of the type
    double nu = 0.0;      // weight of the long-run player's action in the public signal
    double psi = 0.0;     // terminal-payoff weight shorthand (reputation scenarios)
};

// Normalized flow payoff of the long-run player,
//   U/scale_u = -a^2/2 + u_ahata*a*ahat + u_atheta*a*theta
//               + u_hatahata*ahat^2/2 + u_thetatheta*theta^2/2
//               + u_hatatheta*ahat*theta
//               + u0*a + u_hat0*ahat + u_theta0*theta + u_const,
// plus the myopic player's best-response ratios (own payoff normalized the
// same way; only the slopes of the best reply matter, so three numbers).
struct PayoffSpec {
    // long-run player cross ratios
    double u_atheta = 0.0;
    double u_ahata = 0.0;
    double u_hatahata = 0.0;
    double u_thetatheta = 0.0;
    double u_hatatheta = 0.0;
    // long-run player first-order/constant ratios
    double u0 = 0.0;
    double u_hat0 = 0.0;
    double u_theta0 = 0.0;
    double u_const = 0.0;
    // myopic player best-response ratios and intercept
    double uhat_hatatheta = 0.0;
    double uhat_hataa = 0.0;
    double uhat0 = 0.0;
    // raw own-action curvatures |d2U/da2|, |d2Uhat/dahat2|
    double scale_u = 1.0;
    double scale_uhat = 1.0;
};

// Second-order Taylor data of the raw flow payoffs at the origin.
struct RawPayoffU {
    double aa = 0.0, ahat = 0.0, atheta = 0.0;           // a-row second partials
    double hathat = 0.0, hattheta = 0.0, thetatheta = 0.0;
    double grad_a = 0.0, grad_hat = 0.0, grad_theta = 0.0;
    double constant = 0.0;
};
struct RawPayoffUhat {
    double hathat = 0.0, hata = 0.0, hattheta = 0.0;  // own, cross-a, cross-theta
    double grad_hat = 0.0;
};

PayoffSpec normalize_payoffs(const RawPayoffU& u, const RawPayoffUhat& uhat);

struct AssumptionReport {
    bool signaling_nontrivial = false;   // u_atheta*(u_atheta + u_ahata*uhat_hatatheta) > 0
    bool myopic_responds = false;        // |uhat_hatatheta| + |uhat_hataa| != 0
    bool flow_coupling = false;          // |u_ahata| + |u_hatahata| != 0
    bool responses_intersect = false;    // u_ahata*uhat_hataa < 1
    double signaling_value = 0.0;
    double intersect_value = 0.0;

    bool pass() const {
        return signaling_nontrivial && myopic_responds && flow_coupling &&
               responses_intersect;
    }
};

AssumptionReport validate_assumptions(const PayoffSpec& spec);

struct MyopicResponse {
    double delta0 = 0.0, delta1 = 0.0, delta2 = 0.0;
};

// The myopic player's linear best reply to a conjectured long-run strategy
// a = alpha0 + alpha2*L + alpha3*theta, given his posterior mean Mhat:
//   ahat = delta0 + delta1*Mhat + delta2*L.
MyopicResponse myopic_response(const PayoffSpec& spec, double alpha0,
                               double alpha2, double alpha3);

struct TerminalCoefficients {
    std::array<double, 4> beta;   // beta0..beta3
    std::array<double, 3> delta;  // delta0..delta2
};

// Static Nash coefficients at the terminal time, as functions of the
// terminal past-play weight chi_T (closed form; the fixed point of the two
// players' linear best responses).
TerminalCoefficients terminal_coefficients(const PayoffSpec& spec, double chi_T);

// Canonical payoff sets used by the scenarios.
namespace payoff_sets {
PayoffSpec leadership();                  // U = -(a-theta)^2 - (a-ahat)^2, Uhat = -(ahat-a)^2
PayoffSpec leadership_common(double lambda);  // Uhat = -lambda(ahat-theta)^2 - (1-lambda)(ahat-a)^2
PayoffSpec conflict_of_interest();        // Uhat = -(ahat - 1.5 a)^2
PayoffSpec reputation();                  // U = -(a-theta)^2, Uhat = -(ahat-theta)^2
}  // namespace payoff_sets

}  // namespace lme
