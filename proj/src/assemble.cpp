#include "lme/assemble.hpp"

#include <algorithm>
#include <cmath>

#include "lme/errors.hpp"
#include "lme/rng.hpp"

namespace lme {

namespace {

constexpr double kAlphaFloor = 1e-10;
constexpr double kRowTol = 1e-9;  // translation-covariance row tolerance

// Hermite interpolation of the core state to the midpoint of [t_i, t_{i+1}],
// using the forward derivatives reported by the field evaluator. Fourth-order
// accurate, which keeps the secondary-coefficient integration at the same
// order as the core RK4.
CoefficientState midpoint_state(const CoefficientState& a,
                                const CoefficientState& b,
                                const FieldDerivatives& da,
                                const FieldDerivatives& db, double h) {
    auto mid = [h](double xa, double xb, double fa, double fb) {
        return 0.5 * (xa + xb) + h / 8.0 * (fa - fb);
    };
    CoefficientState m;
    m.beta0 = mid(a.beta0, b.beta0, da.dbeta0, db.dbeta0);
    m.beta1 = mid(a.beta1, b.beta1, da.dbeta1, db.dbeta1);
    m.beta2 = mid(a.beta2, b.beta2, da.dbeta2, db.dbeta2);
    m.beta3 = mid(a.beta3, b.beta3, da.dbeta3, db.dbeta3);
    m.v6 = mid(a.v6, b.v6, da.dv6, db.dv6);
    m.v8 = mid(a.v8, b.v8, da.dv8, db.dv8);
    m.gamma = mid(a.gamma, b.gamma, da.dgamma, db.dgamma);
    m.chi = mid(a.chi, b.chi, da.dchi, db.dchi);
    return m;
}

// One backward RK4 step of the scalar linear ODE vdot = r v + f(t) from
// t_{i+1} to t_i, given f at both endpoints and the interval midpoint.
double linear_step_backward(double v_next, double r, double f_lo, double f_mid,
                            double f_hi, double h) {
    const double g1 = r * v_next + f_hi;
    const double g2 = r * (v_next - 0.5 * h * g1) + f_mid;
    const double g3 = r * (v_next - 0.5 * h * g2) + f_mid;
    const double g4 = r * (v_next - h * g3) + f_lo;
    return v_next - h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
}

}  // namespace

CorePath core_from_backward(const Path& backward) {
    if (!backward.completed())
        throw Error("core_from_backward: backward integration did not complete");
    const int n = backward.grid.n_steps;
    CorePath core;
    // accepts either backward orientation (negative-step time grid, or a
    // positive-step grid in s = T - t); values are time-decreasing in both
    core.grid = TimeGrid{std::min(backward.grid.t0, backward.grid.t1),
                         std::max(backward.grid.t0, backward.grid.t1), n};
    core.states.reserve(n + 1);
    for (int i = n; i >= 0; --i)
        core.states.push_back(unpack_core(backward.values[i]));
    return core;
}

CoefficientPath coefficients_from_core(const CorePath& core,
                                       const PayoffSpec& spec) {
    CoefficientPath path;
    path.grid = core.grid;
    path.points.reserve(core.states.size());
    for (const CoefficientState& s : core.states) {
        CoefficientPoint p;
        p.beta = {s.beta0, s.beta1, s.beta2, s.beta3};
        p.alpha0 = s.beta0;
        p.alpha2 = s.beta2 + s.beta1 * (1.0 - s.chi);
        p.alpha3 = s.beta3 + s.beta1 * s.chi;
        const MyopicResponse d = myopic_response(spec, p.alpha0, p.alpha2, p.alpha3);
        p.delta = {d.delta0, d.delta1, d.delta2};
        p.gamma = s.gamma;
        p.chi = s.chi;
        path.points.push_back(p);
    }
    return path;
}

ValueFunction recover_secondary(const CorePath& core, const PayoffSpec& spec,
                                const GameParams& params,
                                const TerminalPayoffSpec& term) {
    const std::size_t n = core.states.size() - 1;
    const double h = core.grid.dt();

    for (std::size_t i = 0; i <= n; ++i) {
        const CoefficientState& s = core.states[i];
        if (std::abs(s.beta3 + s.beta1 * s.chi) < kAlphaFloor)
            throw AlphaVanishes("recover_secondary: signaling coefficient vanishes",
                                core.grid.time(static_cast<int>(i)));
    }

    std::vector<FieldDerivatives> fd(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        fd[i] = field_general(core.states[i], spec, params);

    const CoefficientState& last = core.states[n];
    const TerminalState ts =
        terminal_state_builder(spec, term, last.gamma, last.chi, params);

    ValueFunction vf;
    vf.v.assign(n + 1, {});
    for (std::size_t i = 0; i <= n; ++i) {
        vf.v[i][2] = fd[i].v2;
        vf.v[i][5] = fd[i].v5;
        vf.v[i][6] = core.states[i].v6;
        vf.v[i][7] = fd[i].v7;
        vf.v[i][8] = core.states[i].v8;
        vf.v[i][9] = fd[i].v9;
    }
    vf.v[n][0] = ts.v[0];
    vf.v[n][1] = ts.v[1];
    vf.v[n][3] = ts.v[3];
    vf.v[n][4] = ts.v[4];

    for (std::size_t i = n; i-- > 0;) {
        const FieldDerivatives fmid = field_general(
            midpoint_state(core.states[i], core.states[i + 1], fd[i], fd[i + 1], h),
            spec, params);
        vf.v[i][0] = linear_step_backward(vf.v[i + 1][0], params.r, fd[i].flow0,
                                          fmid.flow0, fd[i + 1].flow0, h);
        vf.v[i][1] = linear_step_backward(vf.v[i + 1][1], params.r, fd[i].flow1,
                                          fmid.flow1, fd[i + 1].flow1, h);
        vf.v[i][3] = linear_step_backward(vf.v[i + 1][3], params.r, fd[i].flow3,
                                          fmid.flow3, fd[i + 1].flow3, h);
        vf.v[i][4] = linear_step_backward(vf.v[i + 1][4], params.r, fd[i].flow4,
                                          fmid.flow4, fd[i + 1].flow4, h);
    }
    return vf;
}

bool translation_covariant(const PayoffSpec& spec) {
    return std::abs(-1.0 + spec.u_ahata + spec.u_atheta) < kRowTol &&
           std::abs(spec.u_ahata + spec.u_hatahata + spec.u_hatatheta) < kRowTol &&
           std::abs(spec.u_atheta + spec.u_hatatheta + spec.u_thetatheta) < kRowTol &&
           std::abs(spec.uhat_hatatheta + spec.uhat_hataa - 1.0) < kRowTol;
}

double foc_residual(const EquilibriumSolution& solution, const PayoffSpec& spec,
                    const GameParams& params, int n_probe_states,
                    std::uint64_t seed) {
    const CounterRng rng(seed);
    const double inv_sy2 = 1.0 / (params.sigma_y * params.sigma_y);
    double worst = 0.0;
    const std::size_t n_pts = solution.coefficients.points.size();
    for (std::size_t i = 0; i < n_pts; ++i) {
        const CoefficientPoint& p = solution.coefficients.points[i];
        const std::array<double, 10>& v = solution.value.v[i];
        const double k_y = p.gamma * p.alpha3 * inv_sy2;
        for (int j = 0; j < n_probe_states; ++j) {
            const auto z = rng.normals(static_cast<std::uint64_t>(j),
                                       static_cast<std::uint32_t>(i), 2);
            const double th = z[0], m = z[1];
            // probe on the regime's state manifold: the public limit has a
            // single common belief, the no-feedback limit a frozen public one
            const double l = params.sigma_x.is_zero()
                                 ? m
                                 : (params.sigma_x.is_infinite() ? params.mu : z[2]);
            const double a = p.beta[0] + p.beta[1] * m + p.beta[2] * l + p.beta[3] * th;
            const double ahat = p.delta[0] + p.delta[1] * m + p.delta[2] * l;
            const double du =
                spec.scale_u *
                (spec.u0 - a + spec.u_ahata * ahat + spec.u_atheta * th);
            const double res =
                du + k_y * (v[2] + 2.0 * v[5] * m + v[7] * th + v[9] * l);
            worst = std::max(worst, std::abs(res));
        }
    }
    return worst;
}

std::array<double, 8> boundary_residual(const EquilibriumSolution& solution,
                                        const PayoffSpec& spec,
                                        const GameParams& params,
                                        const TerminalPayoffSpec& term) {
    const CoefficientPoint& first = solution.coefficients.points.front();
    const CoefficientPoint& last = solution.coefficients.points.back();
    const std::array<double, 10>& v_last = solution.value.v.back();
    const TerminalState target =
        terminal_state_builder(spec, term, last.gamma, last.chi, params);

    std::array<double, 8> res{};
    for (int i = 0; i < 4; ++i) res[i] = std::abs(last.beta[i] - target.beta[i]);
    res[4] = std::abs(v_last[6] - target.v[6]);
    res[5] = std::abs(v_last[8] - target.v[8]);
    res[6] = std::abs(first.gamma - params.gamma0);
    res[7] = std::abs(first.chi);
    return res;
}

InvariantReport check_invariants(const EquilibriumSolution& solution,
                                 const PayoffSpec& spec,
                                 const GameParams& params) {
    InvariantReport rep;
    const auto& pts = solution.coefficients.points;
    rep.min_alpha3_abs = std::abs(pts.front().alpha3);

    const bool covariant = translation_covariant(spec);
    const bool nf = params.sigma_x.is_infinite();
    const bool intercept_free = spec.u0 == 0.0 && spec.u_hat0 == 0.0 &&
                                spec.u_theta0 == 0.0 && spec.uhat0 == 0.0;
    rep.beta_sum_applicable = covariant && (!nf || intercept_free);

    const bool private_values = spec.uhat_hatatheta == 0.0 && spec.uhat_hataa != 0.0;
    rep.chi_map_applicable = !params.sigma_x.is_finite() || private_values;
    ChiConstants cc{};
    if (params.sigma_x.is_finite() && private_values)
        cc = chi_constants(spec.uhat_hataa, params.sigma_x.value, params.sigma_y);

    double prev_gamma = pts.front().gamma;
    for (const CoefficientPoint& p : pts) {
        rep.min_alpha3_abs = std::min(rep.min_alpha3_abs, std::abs(p.alpha3));
        rep.gamma_positive = rep.gamma_positive && p.gamma > 0.0;
        rep.gamma_monotone = rep.gamma_monotone && p.gamma <= prev_gamma + 1e-12;
        prev_gamma = p.gamma;
        // The interior route pins chi(0) = 0 only up to the shooting
        // tolerance, so allow the same slack below zero.
        rep.chi_in_range = rep.chi_in_range && p.chi >= -1e-8 && p.chi < 1.0;

        if (rep.beta_sum_applicable) {
            const double dev =
                nf ? std::abs(p.beta[0] - (1.0 - p.beta[1] - p.beta[3]) * params.mu)
                   : std::abs(p.beta[1] + p.beta[2] + p.beta[3] - 1.0);
            rep.max_beta_sum_dev = std::max(rep.max_beta_sum_dev, dev);
        }
        if (rep.chi_map_applicable) {
            double chi_map = 0.0;
            if (params.sigma_x.is_infinite())
                chi_map = chi_no_feedback(p.gamma, params.gamma0);
            else if (params.sigma_x.is_finite())
                chi_map = chi_closed_form(p.gamma, cc, params.gamma0);
            rep.max_chi_map_dev =
                std::max(rep.max_chi_map_dev, std::abs(p.chi - chi_map));
        }
    }
    for (const auto& row : solution.value.v)
        rep.max_abs_v3 = std::max(rep.max_abs_v3, std::abs(row[3]));
    return rep;
}

EquilibriumSolution assemble_solution(const CorePath& core,
                                      const PayoffSpec& spec,
                                      const GameParams& params,
                                      const TerminalPayoffSpec& term) {
    EquilibriumSolution sol;
    sol.coefficients = coefficients_from_core(core, spec);
    sol.value = recover_secondary(core, spec, params, term);
    sol.diagnostics.boundary_residuals = boundary_residual(sol, spec, params, term);
    sol.diagnostics.invariants = check_invariants(sol, spec, params);
    sol.diagnostics.foc_max_residual = foc_residual(sol, spec, params);
    return sol;
}

EquilibriumSolution assemble_solution(const Path& backward_core,
                                      const PayoffSpec& spec,
                                      const GameParams& params,
                                      const TerminalPayoffSpec& term) {
    return assemble_solution(core_from_backward(backward_core), spec, params, term);
}

}  // namespace lme
