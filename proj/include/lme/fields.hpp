#pragma once
// ODE vector fields for the equilibrium boundary-value problems:
//   * the four hand-written systems (public, no-feedback, private-value
//     interior, and the tilde-variable common-value system), and
//   * a payoff-generic evaluator that re-derives the coefficient dynamics at
//     each state by matching monomial coefficients in the HJB equation.
// The generic evaluator and the hand-written systems are independent
// formulations of the same dynamics; their agreement on random states is the
// module's master correctness check.
//
// All fields return forward-time derivatives; integrate backward by
// reversing the time grid. Value-function quantities (v2..v9 and the
// recovery flows) are in raw payoff units of the long-run player.

#include <array>

#include "lme/learning.hpp"
#include "lme/payoffs.hpp"

namespace lme {

// Core backward/forward state of the interior BVP.
struct CoefficientState {
    double beta0 = 0.0, beta1 = 0.0, beta2 = 0.0, beta3 = 0.0;
    double v6 = 0.0, v8 = 0.0;  // raw payoff units
    double gamma = 1.0, chi = 0.0;
};

// Change-of-variables state for the common-value system:
//   tv6 = v6*gamma/(1-chi)^2, tv8 = v8*gamma/(1-chi), tbeta2 = beta2/(1-chi).
struct TildeState {
    double tv6 = 0.0, tv8 = 0.0;
    double beta1 = 0.0, tbeta2 = 0.0, beta3 = 0.0;
    double gamma = 1.0, chi = 0.0;
};

// Quadratic terminal lump-sum payoff Psi(ahat_T) = psi0 + psi1 x + psi2 x^2
// for the long-run player, in raw payoff units.
struct TerminalPayoffSpec {
    double psi0 = 0.0, psi1 = 0.0, psi2 = 0.0;
    bool zero() const { return psi0 == 0.0 && psi1 == 0.0 && psi2 == 0.0; }
};

// Output of the generic matcher. For the reduced regimes (sigma_X zero or
// infinite) the two-state value function w0..w5 is reported in the
// corresponding v-slots: w2->v2, w4->v5, w5->v7; beta2/v6/v8 components are
// identically zero there.
struct FieldDerivatives {
    double dbeta0 = 0.0, dbeta1 = 0.0, dbeta2 = 0.0, dbeta3 = 0.0;
    double dv6 = 0.0, dv8 = 0.0;
    double dgamma = 0.0, dchi = 0.0;
    // first-order value coefficients implied by the FOC at the state
    double v2 = 0.0, v5 = 0.0, v7 = 0.0, v9 = 0.0;
    // integration flows for the remaining coefficients:
    //   d/dt v_i = r*v_i + flow_i   for i in {0, 1, 3, 4}
    double flow0 = 0.0, flow1 = 0.0, flow3 = 0.0, flow4 = 0.0;
};

// ---- hand-written systems -------------------------------------------------

// Leadership payoffs, public-beliefs regime; state (beta0, beta1, beta3,
// gamma). Backward system as conventionally displayed; note this one returns
// the BACKWARD derivatives (d/ds with s = T - t).
std::array<double, 4> field_public_backward(const std::array<double, 4>& state,
                                            const GameParams& params);

// Leadership payoffs, no-feedback regime; state (beta0, beta1, beta3, gamma)
// with beta0 the weight on the prior mean; chi = 1 - gamma/gamma0 internally.
// Returns BACKWARD derivatives.
std::array<double, 4> field_nofeedback_backward(const std::array<double, 4>& state,
                                                const GameParams& params);

// Leadership payoffs, interior regime, undiscounted; state
// (v6, v8, beta1, beta2, beta3, gamma) in raw payoff units, with chi supplied
// by the private-value closed form. Returns FORWARD derivatives.
std::array<double, 6> field_private_interior(const std::array<double, 6>& state,
                                             const GameParams& params,
                                             const ChiConstants& chi_map);

// Leadership leader with a general myopic response (uhat_hatatheta,
// uhat_hataa), tilde variables, undiscounted. Returns FORWARD derivatives of
// (tv6, tv8, beta1, tbeta2, beta3, gamma, chi).
std::array<double, 7> field_common_value(const TildeState& state,
                                         const PayoffSpec& spec,
                                         const GameParams& params);

// ---- generic matcher ------------------------------------------------------

// Payoff-generic HJB coefficient matching at one state. Dispatches on the
// sigma_X regime: finite -> full interior matching (states theta, m, ell);
// zero/infinite -> reduced two-state matching. The prior mean enters the
// no-feedback regime through beta0, which is then an absolute intercept.
FieldDerivatives field_general(const CoefficientState& state,
                               const PayoffSpec& spec, const GameParams& params);

// ---- terminal states ------------------------------------------------------

struct TerminalState {
    std::array<double, 4> beta{};
    std::array<double, 3> delta{};
    std::array<double, 10> v{};  // raw payoff units, v0..v9
};

// Static equilibrium at the terminal time, including the value-coefficient
// boundary conditions induced by a quadratic terminal payoff. With a zero
// terminal payoff this reduces to terminal_coefficients and v = 0.
TerminalState terminal_state_builder(const PayoffSpec& spec,
                                     const TerminalPayoffSpec& term,
                                     double gamma_T, double chi_T,
                                     const GameParams& params);

// Terminal map for the tilde system: the static coefficients expressed in
// tilde variables, s = (tv6, tv8, beta1, tbeta2, beta3) at chi_T.
std::array<double, 5> tilde_terminal_map(const PayoffSpec& spec,
                                         const TerminalPayoffSpec& term,
                                         double gamma_T, double chi_T,
                                         const GameParams& params);

}  // namespace lme
