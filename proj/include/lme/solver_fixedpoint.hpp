#pragma once
// Forward fixed-point solver for the coupled coefficient BVP, written in the
// rescaled (tilde) variables tv6 = v6*gamma/(1-chi)^2, tv8 = v8*gamma/(1-chi),
// tbeta2 = beta2/(1-chi). A guess s for the five non-learning components at
// t = 0 is integrated forward from (s, gamma0, chi = 0); the gap
//   g(s) = B(chi_T(s)) - (z_T(s) - s)
// re-anchors the terminal static condition B, and s is a fixed point of g
// exactly when the integrated path solves the boundary value problem. A
// damped iteration with a finite-difference Newton polish locates the fixed
// point; a sampled certificate documents when the self-map hypothesis behind
// the construction plausibly holds on a sup-norm ball around s0 = B(0).
//
// This route requires the symmetric long-run flow -(a-theta)^2 - (a-ahat)^2
// (up to the intercept-free normalization with own-curvature 4); the myopic
// flow is unrestricted within the standing assumptions. Intercepts are all
// zero here, so beta0 = 0 identically and the recovered value function has no
// linear terms.

#include <array>

#include "lme/assemble.hpp"
#include "lme/fields.hpp"
#include "lme/payoffs.hpp"

namespace lme {

// (tv6, tv8, beta1, tbeta2, beta3) at t = 0.
using TildeVector = std::array<double, 5>;

struct GapPoint {
    TildeVector s{};
    TildeVector g_of_s{};
    double residual = 0.0;  // sup-norm of g(s) - s
    double chi_T = 0.0;     // from the underlying forward IVP
    double gamma_T = 0.0;
};

// Integrates the forward IVP started at (s, gamma0, 0) and evaluates the gap.
// Throws IvpBlowUp when the integration explodes or the coefficient matching
// degenerates along the path: the start s is reported infeasible.
GapPoint gap(const TildeVector& s, const PayoffSpec& spec,
             const GameParams& params, const TerminalPayoffSpec& term = {});

// Damped iteration s <- s + 0.5*(g(s) - s) from s0 = B(0), switching to a
// quasi-Newton step on h(s) = g(s) - s (forward-difference Jacobian, step
// 1e-6*(1+|s_i|)) once ||h||_inf < 1e-3. Throws NoConvergence(best residual)
// after max_iter; IvpBlowUp propagates with the offending iterate. The
// iteration is deterministic and is not constrained to any ball: the
// certificate below is a separate, purely diagnostic device.
EquilibriumSolution solve_fixed_point(const PayoffSpec& spec,
                                      const GameParams& params,
                                      const TerminalPayoffSpec& term = {},
                                      double tol = 1e-10, int max_iter = 400,
                                      GapPoint* fixed_point_out = nullptr);

struct SelfMapCertificate {
    double rho = 1.0, K = 1.0;
    // analytic horizon below which every start in the rho-ball stays within K
    // of itself (sup-norm), from triangle-inequality bounds on the tilde RHS
    double T_SBC = 0.0;
    // analytic horizon for the self-map property itself; <= T_SBC
    double T_self_map = 0.0;
    double sampled_max_excursion = 0.0;  // max over samples of ||g(s)-s0||_inf
    bool passes = false;                 // all sampled g(s) stayed in the ball
};

// Numerically checks (not proves) the self-map property of g on the sup-norm
// ball S_rho(s0): evaluates g at the center, the 10 face centers, and
// n_samples deterministic pseudo-random points (boundary and interior), and
// reports the max excursion together with the conservative analytic horizon
// estimates. A blown-up sample fails the certificate.
SelfMapCertificate self_map_certificate(const PayoffSpec& spec,
                                        const GameParams& params,
                                        const TerminalPayoffSpec& term = {},
                                        double rho = 1.0, double K = 1.0,
                                        int n_samples = 64);

}  // namespace lme
