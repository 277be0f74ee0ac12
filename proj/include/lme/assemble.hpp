#pragma once
// Turns a solved core coefficient path into a full equilibrium object:
// strategy/myopic coefficient paths, the complete quadratic value function
// (first-order block recovered algebraically from the first-order condition,
// remaining coefficients by direct backward integration), and the diagnostics
// that decide whether the solution is accepted.

#include <array>
#include <cstdint>
#include <vector>

#include "lme/fields.hpp"
#include "lme/odeint.hpp"
#include "lme/payoffs.hpp"

namespace lme {

// Flat layout of CoefficientState used with the ODE integrator:
// {beta0, beta1, beta2, beta3, v6, v8, gamma, chi}.
inline constexpr int kCoreDim = 8;
inline constexpr int kCoreGammaIndex = 6;

inline std::vector<double> pack_core(const CoefficientState& s) {
    return {s.beta0, s.beta1, s.beta2, s.beta3, s.v6, s.v8, s.gamma, s.chi};
}

inline CoefficientState unpack_core(const std::vector<double>& x) {
    CoefficientState s;
    s.beta0 = x[0];
    s.beta1 = x[1];
    s.beta2 = x[2];
    s.beta3 = x[3];
    s.v6 = x[4];
    s.v8 = x[5];
    s.gamma = x[6];
    s.chi = x[7];
    return s;
}

// Core BVP states on a forward grid (states[i] at grid.time(i), t0=0, t1=T).
struct CorePath {
    TimeGrid grid;
    std::vector<CoefficientState> states;
};

// Reverses a backward integration (grid T -> 0) into forward order.
CorePath core_from_backward(const Path& backward);

// Strategy, myopic-response, and learning coefficients per grid point.
struct CoefficientPoint {
    std::array<double, 4> beta{};   // action loadings on (1, M, L, theta)
    double alpha0 = 0.0, alpha2 = 0.0, alpha3 = 0.0;  // myopic-measure loadings
    std::array<double, 3> delta{};  // myopic reply loadings on (1, Mhat, L)
    double gamma = 1.0, chi = 0.0;
};

struct CoefficientPath {
    TimeGrid grid;  // forward: t0 = 0, t1 = T
    std::vector<CoefficientPoint> points;
    std::size_t size() const { return points.size(); }
};

CoefficientPath coefficients_from_core(const CorePath& core,
                                       const PayoffSpec& spec);

// Coefficients of V(theta,m,l,t) = v0 + v1 th + v2 m + v3 l + v4 th^2
// + v5 m^2 + v6 l^2 + v7 th m + v8 th l + v9 m l, raw payoff units,
// one row per grid point.
struct ValueFunction {
    std::vector<std::array<double, 10>> v;
};

// Recovers v0..v9 from the core path: v2, v5, v7, v9 are algebraic (from the
// first-order condition at each point), v6, v8 are core components, and
// v0, v1, v3, v4 are integrated backward from the terminal condition with the
// flows reported by the field evaluator (trapezoid steps on the core grid).
// Throws AlphaVanishes if |alpha3| < 1e-10 anywhere.
ValueFunction recover_secondary(const CorePath& core, const PayoffSpec& spec,
                                const GameParams& params,
                                const TerminalPayoffSpec& term);

// Pointwise structural checks. Applicability of the conditional checks is
// decided from the payoffs/regime, not assumed.
struct InvariantReport {
    // |beta1+beta2+beta3 - 1| (interior), |beta1+beta3 - 1| (public), or
    // |beta0 - (1 - beta1 - beta3) mu| (no-feedback) when the game is
    // translation covariant; see translation_covariant().
    double max_beta_sum_dev = 0.0;
    bool beta_sum_applicable = false;
    // deviation of the path chi from the closed-form chi(gamma) map
    // (private values / no-feedback / public; not applicable otherwise)
    double max_chi_map_dev = 0.0;
    bool chi_map_applicable = false;
    double min_alpha3_abs = 0.0;
    bool gamma_positive = true;
    bool gamma_monotone = true;  // non-increasing in forward time
    bool chi_in_range = true;    // chi in [0, 1)
    // Interior regime closes the coefficient dynamics on the subspace where
    // the linear-in-l value coefficient vanishes; payoffs with intercepts can
    // leave it. max|v3| measures the violation (always 0 for reduced regimes).
    double max_abs_v3 = 0.0;
};

struct Diagnostics {
    double foc_max_residual = 0.0;
    // |terminal core - static target| for (beta0..beta3, v6, v8), then
    // |gamma(0) - gamma0| and |chi(0)|.
    std::array<double, 8> boundary_residuals{};
    InvariantReport invariants;
};

struct EquilibriumSolution {
    CoefficientPath coefficients;
    ValueFunction value;
    Diagnostics diagnostics;
};

// True when a common shift of (a, ahat, theta) leaves marginal incentives
// unchanged: the three quadratic row sums of the long-run payoff vanish and
// the myopic reply slopes add to one. Under this property equilibrium action
// loadings on (M, L, theta) sum to one.
bool translation_covariant(const PayoffSpec& spec);

// Max first-order-condition residual dU/da + (gamma alpha3 / sigma_Y^2)
// (v2 + 2 v5 m + v7 th + v9 l) over n_probe_states random (th, m, l) draws
// per grid time (raw payoff units).
double foc_residual(const EquilibriumSolution& solution, const PayoffSpec& spec,
                    const GameParams& params, int n_probe_states = 50,
                    std::uint64_t seed = 12345);

std::array<double, 8> boundary_residual(const EquilibriumSolution& solution,
                                        const PayoffSpec& spec,
                                        const GameParams& params,
                                        const TerminalPayoffSpec& term);

InvariantReport check_invariants(const EquilibriumSolution& solution,
                                 const PayoffSpec& spec,
                                 const GameParams& params);

// Full pipeline from a completed backward core integration (grid T -> 0):
// flip, derive coefficients, recover the value function, run diagnostics.
EquilibriumSolution assemble_solution(const Path& backward_core,
                                      const PayoffSpec& spec,
                                      const GameParams& params,
                                      const TerminalPayoffSpec& term);

// Same pipeline for an already-forward core path (used by the forward
// fixed-point solver).
EquilibriumSolution assemble_solution(const CorePath& core,
                                      const PayoffSpec& spec,
                                      const GameParams& params,
                                      const TerminalPayoffSpec& term);

}  // namespace lme
