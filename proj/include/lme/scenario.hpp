#pragma once
// Solve-and-report layer: routes a scenario config to the right solver, runs
// the acceptance checks, renders the CSV/JSON artifacts, and drives sweeps.
//
// Route selection is regime-driven: sigma_x = 0 and sigma_x = inf always use
// the reduced one-dimensional shooting solvers; finite sigma_x uses the
// private-values shooting route when the myopic best reply ignores the type,
// the forward fixed point for the common-value family, and whichever of the
// two applies for custom payoffs.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lme/assemble.hpp"
#include "lme/config.hpp"
#include "lme/fields.hpp"
#include "lme/simulate.hpp"

namespace lme {

struct ScenarioResult {
    PayoffSpec spec;
    TerminalPayoffSpec term;
    EquilibriumSolution solution;
    std::string route;  // shooting-public | shooting-nofeedback |
                        // shooting-interior | fixed-point
    double solver_residual = 0.0;
    bool accepted = false;  // every named check below passed
    std::vector<std::pair<std::string, bool>> checks;
    std::vector<std::string> notes;
};

// Acceptance thresholds applied to a solved path (documented in the README).
inline constexpr double kAcceptFocTol = 1e-6;
inline constexpr double kAcceptBoundaryTol = 1e-6;
inline constexpr double kAcceptValueClosureTol = 1e-9;

PayoffSpec scenario_payoffs(const ScenarioConfig& cfg);
TerminalPayoffSpec scenario_terminal(const ScenarioConfig& cfg);

// Solves and verifies one scenario. Solver failures propagate as exceptions;
// a *solved but unverified* path comes back with accepted = false.
ScenarioResult solve_scenario(const ScenarioConfig& cfg);

// Deterministic artifact renderers ("%.17g" numbers, '\n' line ends).
std::string coefficients_csv(const ScenarioResult& res,
                             const ScenarioConfig& cfg);
std::string simulation_csv(const SimulatedEnsemble& ens,
                           const ScenarioConfig& cfg);
std::string diagnostics_json(const ScenarioResult& res,
                             const ScenarioConfig& cfg,
                             const SimulatedEnsemble* ens = nullptr);
std::string error_diagnostics_json(const std::string& error_type,
                                   const std::string& message,
                                   const ScenarioConfig& cfg);

// Short machine-readable tag for a thrown solver/config error.
std::string error_tag(const std::exception& err);

// Batch drivers. Artifacts land under cfg.out_dir; human-readable progress
// goes to log. Returned exit codes: 0 solved and verified, 2 solver
// non-convergence / non-existence, 3 solved but verification failed.
// Config-level misuse (ConfigError, GridMismatch) propagates as an exception
// and maps to exit 1 in the CLI. run_sweep returns 0 once the table is
// written; per-cell failures are data, recorded in the status column.
int run_scenario(const ScenarioConfig& cfg, bool with_simulation,
                 std::ostream& log);
int run_check(const ScenarioConfig& cfg, std::ostream& log);
int run_sweep(const ScenarioConfig& cfg, std::ostream& log);

}  // namespace lme
