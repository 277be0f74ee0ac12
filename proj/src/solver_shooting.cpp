#include "lme/solver_shooting.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lme/errors.hpp"

namespace lme {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxBisect = 200;
// smallest scan probe relative to gamma0; the largest is gamma0*(1 - 1e-9)
constexpr double kScanFloor = 1e-8;
constexpr double kUpperMargin = 1e-9;

struct ProbeOutcome {
    double residual = kInf;  // +inf marks an unusable probe
    bool usable = false;
};

ProbeOutcome evaluate_probe(const BackwardField& field,
                            const TerminalStateFn& terminal, int gamma_component,
                            const TimeGrid& grid, double gamma0, double gammaF,
                            Path* keep_path) {
    ProbeOutcome out;
    try {
        const std::vector<double> init = terminal(gammaF);
        Path p = integrate(field, init, grid);
        if (!p.completed()) return out;
        out.residual = p.back()[static_cast<std::size_t>(gamma_component)] - gamma0;
        out.usable = std::isfinite(out.residual);
        if (out.usable && keep_path) *keep_path = std::move(p);
    } catch (const Error&) {
        // structural guard tripped at this trial terminal point; the probe is
        // infeasible, which the scan treats like an overshoot
    }
    return out;
}

}  // namespace

ShootResult shoot_1d(const BackwardField& field, const TerminalStateFn& terminal,
                     int gamma_component, const GameParams& params, double tol,
                     int max_probes) {
    const double gamma0 = params.gamma0;
    // backward-time grid: s = T - t runs 0 -> T, so the probe's terminal
    // state is the integration's initial state
    const TimeGrid grid = make_grid(0.0, params.T);

    ShootResult result;
    auto probe = [&](double gammaF, Path* keep) {
        const ProbeOutcome o = evaluate_probe(field, terminal, gamma_component,
                                              grid, gamma0, gammaF, keep);
        result.bracket_history.emplace_back(gammaF, o.residual);
        return o;
    };

    // geometric scan, ascending; residual is increasing in gammaF for the
    // reduced systems, so the first sign change is the bracket
    const double lo_probe = gamma0 * kScanFloor;
    const double hi_probe = gamma0 * (1.0 - kUpperMargin);
    const double ratio =
        std::pow(hi_probe / lo_probe, 1.0 / static_cast<double>(max_probes - 1));

    double lo = 0.0;                 // virtual probe: residual -> -gamma0
    double lo_residual = -gamma0;
    double hi = 0.0;
    bool bracketed = false;
    bool hi_usable = false;
    bool all_usable_negative = true;

    for (int j = 0; j < max_probes; ++j) {
        const double g = lo_probe * std::pow(ratio, static_cast<double>(j));
        const ProbeOutcome o = probe(g, nullptr);
        if (o.usable && o.residual < 0.0) {
            lo = g;
            lo_residual = o.residual;
            if (std::abs(o.residual) <= tol) {
                bracketed = true;
                hi = g;
                hi_usable = true;
                break;
            }
            continue;
        }
        all_usable_negative = false;
        hi = g;
        hi_usable = o.usable;
        bracketed = true;
        break;
    }

    if (!bracketed) {
        if (all_usable_negative)
            throw NoBracket(
                "shoot_1d: residual stays negative up to gammaF = gamma0*(1-1e-9); "
                "no solution on this horizon at the requested tolerance");
        throw NoBracket("shoot_1d: no probe produced a usable residual");
    }

    // bisection on [lo, hi]
    double best = hi_usable ? hi : lo;
    double best_residual = hi_usable
                               ? result.bracket_history.back().second
                               : lo_residual;
    if (!(std::abs(best_residual) <= tol)) {
        for (int it = 0; it < kMaxBisect; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;  // interval at rounding limit
            const ProbeOutcome o = probe(mid, nullptr);
            if (o.usable && std::abs(o.residual) <= tol) {
                best = mid;
                best_residual = o.residual;
                break;
            }
            if (o.usable && std::abs(o.residual) < std::abs(best_residual)) {
                best = mid;
                best_residual = o.residual;
            }
            if (o.usable && o.residual < 0.0) {
                lo = mid;
                lo_residual = o.residual;
            } else {
                hi = mid;
                hi_usable = o.usable;
            }
        }
    }

    if (!(std::abs(best_residual) <= tol)) {
        if (!hi_usable)
            throw BlowUp(
                "shoot_1d: bracket collapsed onto a probe whose integration fails",
                hi);
        throw BlowUp("shoot_1d: bisection stalled before reaching tolerance", best);
    }

    result.gammaF = best;
    result.residual = best_residual;
    const ProbeOutcome fin = evaluate_probe(field, terminal, gamma_component, grid,
                                            gamma0, best, &result.path);
    if (!fin.usable)
        throw BlowUp("shoot_1d: accepted probe failed on re-integration", best);
    return result;
}

namespace {

BackwardField core_backward_field(const PayoffSpec& spec,
                                  const GameParams& params) {
    return [spec, params](double, const std::vector<double>& x,
                          std::vector<double>& dx) {
        const FieldDerivatives f = field_general(unpack_core(x), spec, params);
        dx[0] = -f.dbeta0;
        dx[1] = -f.dbeta1;
        dx[2] = -f.dbeta2;
        dx[3] = -f.dbeta3;
        dx[4] = -f.dv6;
        dx[5] = -f.dv8;
        dx[6] = -f.dgamma;
        dx[7] = -f.dchi;
    };
}

template <class ChiOfGamma>
TerminalStateFn core_terminal_fn(const PayoffSpec& spec,
                                 const TerminalPayoffSpec& term,
                                 const GameParams& params, ChiOfGamma chi_of) {
    return [spec, term, params, chi_of](double gammaF) {
        const double chiT = chi_of(gammaF);
        const TerminalState ts =
            terminal_state_builder(spec, term, gammaF, chiT, params);
        CoefficientState s;
        s.beta0 = ts.beta[0];
        s.beta1 = ts.beta[1];
        s.beta2 = ts.beta[2];
        s.beta3 = ts.beta[3];
        s.v6 = ts.v[6];
        s.v8 = ts.v[8];
        s.gamma = gammaF;
        s.chi = chiT;
        return pack_core(s);
    };
}

template <class ChiOfGamma>
EquilibriumSolution solve_core(const PayoffSpec& spec, const GameParams& params,
                               const TerminalPayoffSpec& term, ChiOfGamma chi_of,
                               double tol, int max_probes,
                               ShootResult* shoot_out) {
    ShootResult shoot =
        shoot_1d(core_backward_field(spec, params),
                 core_terminal_fn(spec, term, params, chi_of), kCoreGammaIndex,
                 params, tol, max_probes);
    EquilibriumSolution sol = assemble_solution(shoot.path, spec, params, term);
    if (shoot_out) *shoot_out = std::move(shoot);
    return sol;
}

}  // namespace

EquilibriumSolution solve_public(const PayoffSpec& spec, const GameParams& params,
                                 double tol, const TerminalPayoffSpec& term,
                                 int max_probes, ShootResult* shoot_out) {
    if (!params.sigma_x.is_zero())
        throw ConfigError("solve_public requires the sigma_X = 0 regime");
    return solve_core(spec, params, term, [](double) { return 0.0; }, tol,
                      max_probes, shoot_out);
}

EquilibriumSolution solve_nofeedback(const PayoffSpec& spec,
                                     const GameParams& params, double tol,
                                     const TerminalPayoffSpec& term,
                                     int max_probes, ShootResult* shoot_out) {
    if (!params.sigma_x.is_infinite())
        throw ConfigError("solve_nofeedback requires the sigma_X = infinity regime");
    const double gamma0 = params.gamma0;
    return solve_core(spec, params, term,
                      [gamma0](double g) { return chi_no_feedback(g, gamma0); },
                      tol, max_probes, shoot_out);
}

EquilibriumSolution solve_private_interior(const PayoffSpec& spec,
                                           const GameParams& params, double tol,
                                           const TerminalPayoffSpec& term,
                                           int max_probes,
                                           ShootResult* shoot_out) {
    if (!params.sigma_x.is_finite())
        throw ConfigError("solve_private_interior requires finite sigma_X");
    const ChiConstants cc =
        chi_constants(spec.uhat_hataa, params.sigma_x.value, params.sigma_y);
    const double gamma0 = params.gamma0;
    return solve_core(
        spec, params, term,
        [cc, gamma0](double g) { return chi_closed_form(g, cc, gamma0); }, tol,
        max_probes, shoot_out);
}

}  // namespace lme
