#pragma once
// One-dimensional shooting for the backward boundary-value problems in which
// the whole terminal state is pinned by a single unknown, the terminal-time
// posterior variance gammaF. The start-of-time residual gamma(0) - gamma0 is
// scanned over a geometric probe grid in (0, gamma0) to bracket a sign
// change, then bisected. Probes that blow up or hit a structural guard
// (saturated chi, singular matching, no static equilibrium at the trial
// terminal point) are treated as overshoots (+infinity residual), which is
// the correct orientation for the gamma-monotone backward systems; the final
// accepted probe must integrate cleanly.

#include <functional>
#include <utility>
#include <vector>

#include "lme/assemble.hpp"
#include "lme/fields.hpp"
#include "lme/odeint.hpp"
#include "lme/payoffs.hpp"

namespace lme {

// Backward evaluator: writes d(state)/ds at backward time s = T - t.
using BackwardField =
    std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

// Terminal-state builder: maps a trial gammaF to the full backward initial
// state (the equilibrium state at forward time T).
using TerminalStateFn = std::function<std::vector<double>(double)>;

struct ShootResult {
    double gammaF = 0.0;    // accepted terminal-time posterior variance
    Path path;              // backward grid (t0 = T, t1 = 0) at gammaF
    double residual = 0.0;  // gamma at the backward endpoint minus gamma0
    // every (gammaF probe, residual) evaluated, scan then bisection order;
    // failed probes are recorded with +infinity
    std::vector<std::pair<double, double>> bracket_history;
};

// Generic 1-D shoot. gamma_component indexes gamma within the state vector,
// so the hand-written reduced systems can be shot directly in tests.
// Throws NoBracket when every probe up to gamma0*(1 - 1e-9) undershoots
// (residual < 0) and BlowUp when the bracket collapses onto a probe that
// cannot be integrated.
ShootResult shoot_1d(const BackwardField& field, const TerminalStateFn& terminal,
                     int gamma_component, const GameParams& params,
                     double tol = 1e-9, int max_probes = 32);

// Regime-specific solves over the unified core state (see assemble.hpp for
// the layout); each shoots the payoff-generic backward field with the
// regime's chi(gammaF) map and assembles the full solution. An optional
// out-parameter exposes the shoot diagnostics to callers that report them.
EquilibriumSolution solve_public(const PayoffSpec& spec, const GameParams& params,
                                 double tol = 1e-9,
                                 const TerminalPayoffSpec& term = {},
                                 int max_probes = 32,
                                 ShootResult* shoot_out = nullptr);

EquilibriumSolution solve_nofeedback(const PayoffSpec& spec,
                                     const GameParams& params, double tol = 1e-9,
                                     const TerminalPayoffSpec& term = {},
                                     int max_probes = 32,
                                     ShootResult* shoot_out = nullptr);

// Finite sigma_X. The terminal chi is taken from the private-value closed
// form chi(gamma); with a nonzero myopic type-response slope that map is an
// approximation and the chi(0) boundary residual reports the error.
EquilibriumSolution solve_private_interior(const PayoffSpec& spec,
                                           const GameParams& params,
                                           double tol = 1e-9,
                                           const TerminalPayoffSpec& term = {},
                                           int max_probes = 32,
                                           ShootResult* shoot_out = nullptr);

}  // namespace lme
