#include "lme/solver_fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lme/errors.hpp"
#include "lme/odeint.hpp"
#include "lme/rng.hpp"

namespace lme {

namespace {

constexpr double kNewtonSwitch = 1e-3;  // residual below which Newton kicks in
constexpr double kFdStep = 1e-6;        // forward-difference step scale
constexpr double kDamping = 0.5;
constexpr std::uint32_t kCertPurpose = 3;  // RNG stream for certificate samples
constexpr std::uint64_t kCertSeed = 20240915;

std::string format_point(const TildeVector& s) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "(%.6g, %.6g, %.6g, %.6g, %.6g)", s[0], s[1],
                  s[2], s[3], s[4]);
    return buf;
}

// The tilde system is derived for the symmetric long-run flow
// -(a-theta)^2 - (a-ahat)^2 with no intercepts on either side; reject other
// long-run payoffs instead of silently producing wrong coefficients.
void require_symmetric_flow(const PayoffSpec& spec) {
    auto near = [](double x, double y) { return std::abs(x - y) <= 1e-12; };
    const bool ok = near(spec.u_atheta, 0.5) && near(spec.u_ahata, 0.5) &&
                    near(spec.u_hatahata, -0.5) &&
                    near(spec.u_thetatheta, -0.5) &&
                    near(spec.u_hatatheta, 0.0) && near(spec.scale_u, 4.0) &&
                    spec.u0 == 0.0 && spec.u_hat0 == 0.0 &&
                    spec.u_theta0 == 0.0 && spec.uhat0 == 0.0;
    if (!ok)
        throw ConfigError(
            "the forward fixed-point route requires the symmetric long-run "
            "flow -(a-theta)^2 - (a-ahat)^2 with no intercepts");
}

void require_interior_noise(const GameParams& params) {
    if (!params.sigma_x.is_finite())
        throw ConfigError(
            "the forward fixed-point route requires finite positive private "
            "monitoring noise");
}

// The tilde system carries no action-intercept equation: beta0 stays zero
// only when the terminal lump sum is even in the myopic action.
void require_even_terminal(const TerminalPayoffSpec& term) {
    if (term.psi1 != 0.0)
        throw ConfigError(
            "the forward fixed-point route requires an even terminal lump "
            "sum (no linear term)");
}

TildeState unpack_tilde(const std::vector<double>& x) {
    TildeState z;
    z.tv6 = x[0];
    z.tv8 = x[1];
    z.beta1 = x[2];
    z.tbeta2 = x[3];
    z.beta3 = x[4];
    z.gamma = x[5];
    z.chi = x[6];
    return z;
}

// Forward IVP from (s, gamma0, chi=0) on [0, T]. Field errors (saturated chi,
// degenerate matching) and numeric blow-ups are both reported as IvpBlowUp:
// the start is infeasible on this horizon.
Path integrate_tilde(const TildeVector& s, const PayoffSpec& spec,
                     const GameParams& params) {
    const TimeGrid grid = make_grid(0.0, params.T);
    const std::vector<double> init{s[0], s[1], s[2],        s[3],
                                   s[4], params.gamma0, 0.0};
    double last_time = 0.0;
    auto field = [&](double t, const std::vector<double>& x,
                     std::vector<double>& dx) {
        last_time = t;
        const std::array<double, 7> f =
            field_common_value(unpack_tilde(x), spec, params);
        std::copy(f.begin(), f.end(), dx.begin());
    };
    Path path;
    try {
        path = integrate(field, init, grid);
    } catch (const Error& e) {
        throw IvpBlowUp("forward integration failed at start " +
                            format_point(s) + ": " + e.what(),
                        last_time);
    }
    if (!path.completed())
        throw IvpBlowUp(
            "forward integration exploded at start " + format_point(s),
            path.blowup_time);
    return path;
}

GapPoint gap_from_path(const TildeVector& s, const Path& path,
                       const PayoffSpec& spec, const GameParams& params,
                       const TerminalPayoffSpec& term) {
    const std::vector<double>& zT = path.back();
    GapPoint out;
    out.s = s;
    out.gamma_T = zT[5];
    out.chi_T = zT[6];
    const std::array<double, 5> anchor =
        tilde_terminal_map(spec, term, out.gamma_T, out.chi_T, params);
    for (int i = 0; i < 5; ++i) {
        out.g_of_s[i] = anchor[i] - (zT[i] - s[i]);
        out.residual = std::max(out.residual, std::abs(out.g_of_s[i] - s[i]));
    }
    return out;
}

CorePath core_from_tilde(const Path& forward) {
    CorePath core;
    core.grid = forward.grid;
    core.states.reserve(forward.values.size());
    for (const std::vector<double>& x : forward.values) {
        const double gamma = x[5], chi = x[6];
        const double omc = 1.0 - chi;
        CoefficientState c;
        c.beta0 = 0.0;  // intercept-free family
        c.beta1 = x[2];
        c.beta2 = x[3] * omc;
        c.beta3 = x[4];
        c.v6 = x[0] * omc * omc / gamma;  // undo tv6 = v6*gamma/(1-chi)^2
        c.v8 = x[1] * omc / gamma;        // undo tv8 = v8*gamma/(1-chi)
        c.gamma = gamma;
        c.chi = chi;
        core.states.push_back(c);
    }
    return core;
}

}  // namespace

GapPoint gap(const TildeVector& s, const PayoffSpec& spec,
             const GameParams& params, const TerminalPayoffSpec& term) {
    require_symmetric_flow(spec);
    require_interior_noise(params);
    require_even_terminal(term);
    const Path path = integrate_tilde(s, spec, params);
    return gap_from_path(s, path, spec, params, term);
}

EquilibriumSolution solve_fixed_point(const PayoffSpec& spec,
                                      const GameParams& params,
                                      const TerminalPayoffSpec& term,
                                      double tol, int max_iter,
                                      GapPoint* fixed_point_out) {
    require_symmetric_flow(spec);
    require_interior_noise(params);
    require_even_terminal(term);

    const std::array<double, 5> s0 =
        tilde_terminal_map(spec, term, params.gamma0, 0.0, params);
    TildeVector s{s0[0], s0[1], s0[2], s0[3], s0[4]};

    double best = std::numeric_limits<double>::infinity();
    GapPoint point;
    bool converged = false;

    for (int iter = 0; iter < max_iter; ++iter) {
        point = gap(s, spec, params, term);
        best = std::min(best, point.residual);
        if (point.residual <= tol) {
            converged = true;
            break;
        }
        TildeVector h;
        for (int i = 0; i < 5; ++i) h[i] = point.g_of_s[i] - s[i];

        bool stepped = false;
        if (point.residual < kNewtonSwitch) {
            Eigen::Matrix<double, 5, 5> J;
            for (int j = 0; j < 5; ++j) {
                TildeVector sj = s;
                const double step = kFdStep * (1.0 + std::abs(s[j]));
                sj[j] += step;
                const GapPoint gj = gap(sj, spec, params, term);
                for (int i = 0; i < 5; ++i)
                    J(i, j) = ((gj.g_of_s[i] - sj[i]) - h[i]) / step;
            }
            Eigen::FullPivLU<Eigen::Matrix<double, 5, 5>> lu(J);
            if (lu.isInvertible()) {
                Eigen::Matrix<double, 5, 1> rhs;
                for (int i = 0; i < 5; ++i) rhs(i) = -h[i];
                const Eigen::Matrix<double, 5, 1> ds = lu.solve(rhs);
                for (int i = 0; i < 5; ++i) s[i] += ds(i);
                stepped = true;
            }
        }
        if (!stepped)
            for (int i = 0; i < 5; ++i) s[i] += kDamping * h[i];
    }
    if (!converged)
        throw NoConvergence(
            "fixed-point iteration did not reach tolerance; no equilibrium "
            "found on this horizon",
            best);

    if (fixed_point_out) *fixed_point_out = point;
    const Path path = integrate_tilde(s, spec, params);
    return assemble_solution(core_from_tilde(path), spec, params, term);
}

SelfMapCertificate self_map_certificate(const PayoffSpec& spec,
                                        const GameParams& params,
                                        const TerminalPayoffSpec& term,
                                        double rho, double K, int n_samples) {
    require_symmetric_flow(spec);
    require_interior_noise(params);
    require_even_terminal(term);
    if (!(rho > 0.0) || !(K > 0.0))
        throw ConfigError("certificate radii rho and K must be positive");

    const double uh_t = spec.uhat_hatatheta;
    const double uh_a = spec.uhat_hataa;
    const double sx2 = params.sigma_x.value * params.sigma_x.value;
    const double sy2 = params.sigma_y * params.sigma_y;

    // Sup bounds available while the path stays within rho+K (sup-norm) of
    // s0 = B(0), together with gamma in (0, gamma0] and chi in [0, 1):
    const double bv = rho + K;                                   // |tv6|, |tv8|
    const double bb = std::abs(uh_a + 2.0 * uh_t) / 4.0 + rho + K;  // |b1|,|tb2|
    const double bb3 = 0.5 + rho + K;                            // |beta3|
    const double ba = bb + bb3;             // |alpha| = |b3 + b1*chi|, chi < 1
    const double bd = std::abs(uh_t) + std::abs(uh_a) * ba;  // |uh_t + uh_a*a|
    const double at = std::abs(uh_t);
    const double am1 = std::abs(uh_a - 1.0);
    const double a2m1 = std::abs(2.0 * uh_a - 1.0);

    // positive lower bounds on the matching denominators
    const double uu = std::min(1.0, 1.0 + uh_t);  // 1 + uh_t*chi over chi<1
    const double phi = std::min(2.0, 2.0 - uh_a);  // 2 - uh_a*chi_T
    if (uu <= 0.0 || phi <= 0.0)
        throw ConfigError(
            "certificate bounds require 1 + uhat_hatatheta > 0 and "
            "2 - uhat_hataa > 0");

    // Triangle-inequality sup bounds h_i on the five tilde equations, built
    // term by term with the bounds above, chi powers <= 1, gamma <= gamma0.
    // Every h_i is gamma0 times a gamma0-free expression, so the reported
    // horizons scale exactly like 1/gamma0.
    //
    // tv6 equation: gamma*{ -b1^2 + 2 b1 tb2 + tb2^2
    //                       + tv6*[a^2/sy2 + 2 d1^2 chi/sx2] }
    const double h1 =
        params.gamma0 *
        (bb * bb + 2.0 * bb * bb + bb * bb +
         bv * (ba * ba / sy2 + 2.0 * bd * bd / sx2));
    // tv8 equation: gamma*{ (-2+4a) b1 - 2 tb2 + tv8 d1^2 chi/sx2
    //                       - 4 b1^2 chi }
    const double h2 =
        params.gamma0 * ((2.0 + 4.0 * ba) * bb + 2.0 * bb +
                         bv * bd * bd / sx2 + 4.0 * bb * bb);
    // b1 equation, prefactor gamma/(4 sx2 sy2 (1 + uh_t chi)); the braces hold
    //   2 sx2 a (d1^2 - a d1)
    //   + 4 sx2 a b1 (a - b1)
    //   + tv8 a chi d1^2 (uh_t - 2 b1)
    //   + 4 b1 chi [uh_t^2 sy2 + uh_t a (uh_t sx2 + 2 uh_a sy2 - sx2 b1)]
    //   + 4 uh_a b1 a^2 chi (2 uh_t sx2 + uh_a sy2 + sx2 a (uh_a - 1))
    //   - 4 sy2 d1^2 tb2 chi
    //   + 4 sy2 d1^2 b1 (uh_t - 2 tb2) chi^2
    const double h3 =
        params.gamma0 / (4.0 * sx2 * sy2 * uu) *
        (2.0 * sx2 * ba * (bd * bd + ba * bd) +
         4.0 * sx2 * ba * bb * (ba + bb) +
         bv * ba * bd * bd * (at + 2.0 * bb) +
         4.0 * bb *
             (at * at * sy2 +
              at * ba * (at * sx2 + 2.0 * std::abs(uh_a) * sy2 + sx2 * bb)) +
         4.0 * std::abs(uh_a) * bb * ba * ba *
             (2.0 * at * sx2 + std::abs(uh_a) * sy2 + sx2 * ba * am1) +
         4.0 * sy2 * bd * bd * bb +
         4.0 * sy2 * bd * bd * bb * (at + 2.0 * bb));
    // tb2 equation, same prefactor; the braces hold
    //   2 sx2 a [uh_t^2 + 2 b1^2 + a (uh_t (2 uh_a - 1) + 2 tb2)]
    //   + 2 sx2 a^3 uh_a (uh_a - 1)
    //   + a chi d1^2 [-4 tv6 + tv8 (uh_t - 2 tb2)]
    //   + 4 a chi sx2 [uh_t b1^2 + (uh_t^2 + uh_a a (2 uh_t + (uh_a-1) a)) tb2]
    //   - 4 d1^2 [uh_t tv6 a + sy2 tb2 (-uh_t + 2 tb2)] chi^2
    const double h4 =
        params.gamma0 / (4.0 * sx2 * sy2 * uu) *
        (2.0 * sx2 * ba *
             (at * at + 2.0 * bb * bb + ba * (at * a2m1 + 2.0 * bb)) +
         2.0 * sx2 * ba * ba * ba * std::abs(uh_a) * am1 +
         ba * bd * bd * (4.0 * bv + bv * (at + 2.0 * bb)) +
         4.0 * ba * sx2 *
             (at * bb * bb +
              (at * at + std::abs(uh_a) * ba * (2.0 * at + am1 * ba)) * bb) +
         4.0 * bd * bd * (at * bv * ba + sy2 * bb * (at + 2.0 * bb)));
    // b3 equation, same prefactor; the braces hold
    //   -4 sx2 a^2 b1
    //   - chi^2 [tv8 a d1^2 (uh_t - 2 b1)]
    //   + 2 a chi d1 [-uh_t sx2 + sx2 a (2 uh_t + (uh_a-1)(2a - 1))]
    //   - 2 a^2 chi tv8 d1^2
    //   - 2 a chi [2 uh_t sx2 a b1 - 2 sx2 b1^2]
    //   - 4 sx2 chi^2 a b1 [uh_t a (2 uh_a - 1) + uh_a a^2 (uh_a - 1)
    //                       + uh_t (uh_t - b1)]
    //   - 4 sy2 chi^2 d1^2 (-1 + 2a) tb2
    //   + 8 sy2 d1^2 b1 tb2 chi^3
    const double h5 =
        params.gamma0 / (4.0 * sx2 * sy2 * uu) *
        (4.0 * sx2 * ba * ba * bb +
         bv * ba * bd * bd * (at + 2.0 * bb) +
         2.0 * ba * bd * sx2 * (at + ba * (2.0 * at + am1 * (2.0 * ba + 1.0))) +
         2.0 * ba * ba * bv * bd * bd +
         2.0 * ba * (2.0 * at * sx2 * ba * bb + 2.0 * sx2 * bb * bb) +
         4.0 * sx2 * ba * bb *
             (at * ba * a2m1 + std::abs(uh_a) * ba * ba * am1 +
              at * (at + bb)) +
         4.0 * sy2 * bd * bd * (1.0 + 2.0 * ba) * bb +
         8.0 * sy2 * bd * bd * bb * bb);

    const double h_max = std::max({h1, h2, h3, h4, h5});

    // Terminal re-anchoring drift: moving chi_T away from 0 shifts the static
    // anchor in the (b1, tb2) components by at most Delta_bound * T, using
    // chi_T <= gamma0 * a^2 * T / sy2 and 2 - uh_a*chi_T >= phi.
    const double delta_bound = std::abs(uh_a + 2.0 * uh_t) / 4.0 *
                               (std::abs(uh_a) * params.gamma0 * ba * ba / sy2) /
                               phi;

    SelfMapCertificate cert;
    cert.rho = rho;
    cert.K = K;
    cert.T_SBC = K / h_max;
    cert.T_self_map =
        std::min(cert.T_SBC, rho / (delta_bound + h_max));

    // Sampled check of the self-map property: center, the 10 face centers,
    // then deterministic pseudo-random boundary/interior points.
    const CounterRng rng(kCertSeed);
    std::vector<TildeVector> samples;
    samples.reserve(static_cast<std::size_t>(n_samples) + 11);
    const std::array<double, 5> s0 =
        tilde_terminal_map(spec, term, params.gamma0, 0.0, params);
    const TildeVector center{s0[0], s0[1], s0[2], s0[3], s0[4]};
    samples.push_back(center);
    for (int i = 0; i < 5; ++i) {
        for (double sign : {1.0, -1.0}) {
            TildeVector s = center;
            s[i] += sign * rho;
            samples.push_back(s);
        }
    }
    for (int j = 0; j < n_samples; ++j) {
        const auto za = rng.normals(static_cast<std::uint64_t>(j), 0, kCertPurpose);
        const auto zb = rng.normals(static_cast<std::uint64_t>(j), 1, kCertPurpose);
        double u[5];
        for (int i = 0; i < 4; ++i) u[i] = std::erf(za[i] / std::sqrt(2.0));
        u[4] = std::erf(zb[0] / std::sqrt(2.0));
        double umax = 0.0;
        for (double v : u) umax = std::max(umax, std::abs(v));
        TildeVector s = center;
        if (j % 2 == 0 && umax > 0.0) {
            // project onto the sup-norm boundary of the ball
            for (int i = 0; i < 5; ++i) s[i] += rho * u[i] / umax;
        } else {
            for (int i = 0; i < 5; ++i) s[i] += rho * u[i];
        }
        samples.push_back(s);
    }

    cert.passes = true;
    for (const TildeVector& s : samples) {
        double excursion = std::numeric_limits<double>::infinity();
        try {
            const GapPoint gp = gap(s, spec, params, term);
            excursion = 0.0;
            for (int i = 0; i < 5; ++i)
                excursion =
                    std::max(excursion, std::abs(gp.g_of_s[i] - center[i]));
        } catch (const IvpBlowUp&) {
            // infeasible sample: the map is not even defined here
        }
        cert.sampled_max_excursion =
            std::max(cert.sampled_max_excursion, excursion);
        if (!(excursion <= rho)) cert.passes = false;
    }
    return cert;
}

}  // namespace lme
