#include "lme/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lme/errors.hpp"
#include "lme/rng.hpp"

namespace lme {

namespace {

constexpr std::uint32_t kStepNoisePurpose = 0;

struct StepRow {
    double beta0, beta1, beta2, beta3;
    double alpha0, alpha2, alpha3;
    double delta0, delta1, delta2;
    double gamma, chi;
    double discount;  // exp(-r t)
};

StepRow row_from_point(const CoefficientPoint& p) {
    StepRow r;
    r.beta0 = p.beta[0];
    r.beta1 = p.beta[1];
    r.beta2 = p.beta[2];
    r.beta3 = p.beta[3];
    r.alpha0 = p.alpha0;
    r.alpha2 = p.alpha2;
    r.alpha3 = p.alpha3;
    r.delta0 = p.delta[0];
    r.delta1 = p.delta[1];
    r.delta2 = p.delta[2];
    r.gamma = p.gamma;
    r.chi = p.chi;
    r.discount = 1.0;
    return r;
}

StepRow lerp(const StepRow& a, const StepRow& b, double w) {
    StepRow r;
    r.beta0 = a.beta0 + w * (b.beta0 - a.beta0);
    r.beta1 = a.beta1 + w * (b.beta1 - a.beta1);
    r.beta2 = a.beta2 + w * (b.beta2 - a.beta2);
    r.beta3 = a.beta3 + w * (b.beta3 - a.beta3);
    r.delta0 = a.delta0 + w * (b.delta0 - a.delta0);
    r.delta1 = a.delta1 + w * (b.delta1 - a.delta1);
    r.delta2 = a.delta2 + w * (b.delta2 - a.delta2);
    r.gamma = a.gamma + w * (b.gamma - a.gamma);
    r.chi = a.chi + w * (b.chi - a.chi);
    // keep the reduced-form columns exactly on the coefficient map so the
    // on-path strategy identity holds to rounding on interpolated rows too
    r.alpha0 = r.beta0;
    r.alpha2 = r.beta2 + r.beta1 * (1.0 - r.chi);
    r.alpha3 = r.beta3 + r.beta1 * r.chi;
    r.discount = 1.0;
    return r;
}

// dt must refine the solution grid by an integer factor (coefficients are
// interpolated on substeps) or coarsen it by an integer factor that divides
// the step count (coefficients are subsampled exactly).
std::vector<StepRow> build_rows(const EquilibriumSolution& sol, double dt,
                                const GameParams& params) {
    const TimeGrid& grid = sol.coefficients.grid;
    const double h = grid.dt();
    if (!(dt > 0.0)) throw GridMismatch("simulation step must be positive");
    std::vector<StepRow> rows;
    if (dt <= h * (1.0 + 1e-9)) {
        const double ratio = h / dt;
        const int k = static_cast<int>(std::lround(ratio));
        if (k < 1 || std::abs(ratio - k) > 1e-9 * k)
            throw GridMismatch(
                "simulation step must divide the solution grid spacing");
        rows.reserve(static_cast<std::size_t>(grid.n_steps) * k + 1);
        for (int q = 0; q < grid.n_steps; ++q) {
            const StepRow a = row_from_point(sol.coefficients.points[q]);
            const StepRow b = row_from_point(sol.coefficients.points[q + 1]);
            for (int s = 0; s < k; ++s)
                rows.push_back(s == 0 ? a
                                      : lerp(a, b, static_cast<double>(s) / k));
        }
        rows.push_back(row_from_point(sol.coefficients.points.back()));
    } else {
        const double ratio = dt / h;
        const int m = static_cast<int>(std::lround(ratio));
        if (m < 1 || std::abs(ratio - m) > 1e-9 * m ||
            grid.n_steps % m != 0)
            throw GridMismatch(
                "simulation step must be an integer multiple of the solution "
                "grid spacing that divides the horizon");
        rows.reserve(static_cast<std::size_t>(grid.n_steps) / m + 1);
        for (int j = 0; j * m <= grid.n_steps; ++j)
            rows.push_back(row_from_point(sol.coefficients.points[j * m]));
    }
    for (std::size_t j = 0; j < rows.size(); ++j)
        rows[j].discount = std::exp(-params.r * (static_cast<double>(j) * dt));
    return rows;
}

std::vector<int> checkpoint_indices(int n_steps) {
    std::vector<int> idx;
    for (int f = 0; f <= 8; ++f)
        idx.push_back(static_cast<int>(
            std::lround(static_cast<double>(n_steps) * f / 8.0)));
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

double flow_payoff(const PayoffSpec& sp, double a, double ahat, double theta) {
    return sp.scale_u *
           (-0.5 * a * a + sp.u_ahata * a * ahat + sp.u_atheta * a * theta +
            0.5 * sp.u_hatahata * ahat * ahat +
            0.5 * sp.u_thetatheta * theta * theta +
            sp.u_hatatheta * ahat * theta + sp.u0 * a + sp.u_hat0 * ahat +
            sp.u_theta0 * theta + sp.u_const);
}

void mean_se(const std::vector<double>& x, double& mean, double& se) {
    const std::size_t n = x.size();
    mean = 0.0;
    se = 0.0;
    if (n == 0) return;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    if (n < 2) return;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    se = std::sqrt(ss / static_cast<double>(n - 1) /
                   static_cast<double>(n));
}

}  // namespace

FilterCoefficients filter_coefficients(double alpha0, double alpha2,
                                       double alpha3, double gamma, double ell,
                                       const GameParams& params) {
    const double sy2 = params.sigma_y * params.sigma_y;
    double sigma = 1.0 / sy2;  // total signal-to-noise loading on theta
    double bx = 0.0;
    if (params.sigma_x.is_finite() && params.nu != 0.0) {
        const double sx = params.sigma_x.value;
        sigma += params.nu * params.nu / (sx * sx);
        bx = params.nu * alpha3 * gamma / sx;
    } else if (params.sigma_x.is_zero() && params.nu != 0.0) {
        throw ConfigError(
            "a noiseless public signal cannot carry the long-run action");
    }
    FilterCoefficients fc;
    fc.kappa1 = alpha3 * gamma * sigma;
    fc.kappa0 = -fc.kappa1 * (alpha0 + alpha2 * ell);
    fc.kappa2 = -alpha3 * fc.kappa1;
    fc.BX = bx;
    fc.BY = alpha3 * gamma / params.sigma_y;
    return fc;
}

LRecursion l_recursion(const std::array<double, 3>& delta, double gamma,
                       double chi, double sigma_x) {
    if (!(sigma_x > 0.0) || !std::isfinite(sigma_x))
        throw ConfigError(
            "the public-belief recursion needs finite positive signal noise");
    const double denom = sigma_x * sigma_x * (1.0 - chi);
    if (denom <= 0.0)
        throw ChiSaturated("past-play weight saturated in the belief recursion");
    const double core = gamma * chi * delta[1] / denom;
    LRecursion l;
    l.l0 = -core * delta[0];
    l.l1 = -core * (delta[1] + delta[2]);
    l.B = core;
    return l;
}

SimulatedEnsemble simulate_paths(const EquilibriumSolution& solution,
                                 const PayoffSpec& spec,
                                 const GameParams& params, int n_paths,
                                 double dt, std::uint64_t seed,
                                 std::optional<double> fixed_theta,
                                 const BetaScale& deviation,
                                 int noise_substeps, bool store_series,
                                 const TerminalPayoffSpec& term) {
    if (n_paths <= 0) throw ConfigError("need a positive number of paths");
    if (noise_substeps < 1) throw ConfigError("need at least one noise substep");
    if (params.nu != 0.0)
        throw ConfigError(
            "path simulation supports only a pure myopic-action public "
            "signal (nu = 0)");

    const std::vector<StepRow> rows = build_rows(solution, dt, params);
    const int n_steps = static_cast<int>(rows.size()) - 1;
    const bool finite_x = params.sigma_x.is_finite();
    const bool public_x = params.sigma_x.is_zero();
    const double sx = finite_x ? params.sigma_x.value : 0.0;
    const double sx2 = sx * sx;
    const double sy = params.sigma_y;
    const double sy2 = sy * sy;
    const double sqdt = std::sqrt(dt);
    const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(noise_substeps));

    SimulatedEnsemble ens;
    ens.n_paths = n_paths;
    ens.n_steps = n_steps;
    ens.dt = dt;
    ens.seed = seed;
    ens.theta.resize(n_paths);
    ens.payoff_discounted.resize(n_paths);
    ens.adaptation_cost.resize(n_paths);
    ens.coordination_cost.resize(n_paths);
    const std::vector<int> cps = checkpoint_indices(n_steps);
    for (int idx : cps) ens.checkpoint_times.push_back(idx * dt);
    ens.mhat_at.assign(cps.size(), std::vector<double>(n_paths));
    ens.m_at.assign(cps.size(), std::vector<double>(n_paths));
    ens.ell_at.assign(cps.size(), std::vector<double>(n_paths));
    if (store_series) ens.series.resize(n_paths);

    const CounterRng rng(seed);

    for (int p = 0; p < n_paths; ++p) {
        const double theta =
            fixed_theta ? *fixed_theta
                        : params.mu + std::sqrt(params.gamma0) *
                                          rng.normal_theta(
                                              static_cast<std::uint64_t>(p));
        double mhat = params.mu, m = params.mu, ell = params.mu;
        double y = 0.0, x = 0.0;
        double pay = 0.0, adapt = 0.0, coord = 0.0;
        double prev_pay_flow = 0.0, prev_adapt = 0.0, prev_coord = 0.0;
        double last_ahat = 0.0;
        std::size_t cp_cursor = 0;
        PathSeries* series = store_series ? &ens.series[p] : nullptr;
        if (series) {
            series->a.reserve(n_steps + 1);
            series->ahat.reserve(n_steps + 1);
            series->y.reserve(n_steps + 1);
            series->x.reserve(n_steps + 1);
            series->mhat.reserve(n_steps + 1);
            series->m.reserve(n_steps + 1);
            series->ell.reserve(n_steps + 1);
            series->dz.reserve(n_steps);
        }

        for (int j = 0; j <= n_steps; ++j) {
            const StepRow& c = rows[j];
            const double a = deviation.scale[0] * c.beta0 +
                             deviation.scale[1] * c.beta1 * m +
                             deviation.scale[2] * c.beta2 * ell +
                             deviation.scale[3] * c.beta3 * theta;
            const double ahat = c.delta0 + c.delta1 * mhat + c.delta2 * ell;
            last_ahat = ahat;

            // trapezoid accumulation of the flow integrals
            const double pay_flow = c.discount * flow_payoff(spec, a, ahat, theta);
            const double da = a - theta;
            const double dc = a - ahat;
            if (j > 0) {
                pay += 0.5 * (prev_pay_flow + pay_flow) * dt;
                adapt += 0.5 * (prev_adapt + da * da) * dt;
                coord += 0.5 * (prev_coord + dc * dc) * dt;
            }
            prev_pay_flow = pay_flow;
            prev_adapt = da * da;
            prev_coord = dc * dc;

            // representation and strategy-identity diagnostics
            const double rep_dev = m - (c.chi * theta + (1.0 - c.chi) * ell);
            ens.representation_sup =
                std::max(ens.representation_sup, std::abs(rep_dev));
            const double a_equilibrium =
                c.beta0 + c.beta1 * m + c.beta2 * ell + c.beta3 * theta;
            const double a_reduced =
                c.alpha0 + c.alpha2 * ell + c.alpha3 * theta;
            ens.strategy_identity_sup = std::max(
                ens.strategy_identity_sup,
                std::abs((a_equilibrium - a_reduced) - c.beta1 * rep_dev));

            if (cp_cursor < cps.size() && cps[cp_cursor] == j) {
                ens.mhat_at[cp_cursor][p] = mhat;
                ens.m_at[cp_cursor][p] = m;
                ens.ell_at[cp_cursor][p] = ell;
                ++cp_cursor;
            }
            if (series) {
                series->a.push_back(a);
                series->ahat.push_back(ahat);
                series->y.push_back(y);
                series->x.push_back(x);
                series->mhat.push_back(mhat);
                series->m.push_back(m);
                series->ell.push_back(ell);
            }
            if (j == n_steps) break;

            double eps_y = 0.0, eps_x = 0.0;
            for (int s = 0; s < noise_substeps; ++s) {
                const std::uint32_t idx = static_cast<std::uint32_t>(
                    j * noise_substeps + s);
                const std::array<double, 4> z = rng.normals(
                    static_cast<std::uint64_t>(p), idx, kStepNoisePurpose);
                eps_y += z[0];
                eps_x += z[1];
            }
            eps_y *= inv_sqrt_k;
            eps_x *= inv_sqrt_k;

            const double dy = a * dt + sy * sqdt * eps_y;

            // myopic belief: drift kappa0 + kappa1 a + kappa2 Mhat against
            // the realized action, noise loading gamma alpha3 / sigma_Y
            const double kappa1 = c.alpha3 * c.gamma / sy2;
            const double dmhat =
                (kappa1 * (a - (c.alpha0 + c.alpha2 * ell + c.alpha3 * mhat))) *
                    dt +
                (c.alpha3 * c.gamma / sy) * sqdt * eps_y;

            if (finite_x) {
                const double dx = ahat * dt + sx * sqdt * eps_x;
                // public belief: dL = (l0 + l1 L) dt + B dX
                const double core =
                    c.gamma * c.chi * c.delta1 / (sx2 * (1.0 - c.chi));
                const double dell =
                    (-core * c.delta0 -
                     core * (c.delta1 + c.delta2) * ell) *
                        dt +
                    core * dx;
                // second-order belief: same drift as Mhat against the
                // conjecture, innovation loading gamma chi delta1 / sigma_X
                const double dz_inc =
                    (dx - (c.delta0 + c.delta1 * m + c.delta2 * ell) * dt) / sx;
                const double dm =
                    (kappa1 * (a - (c.alpha0 + c.alpha2 * ell + c.alpha3 * m))) *
                        dt +
                    (c.gamma * c.chi * c.delta1 / sx) * dz_inc;
                if (series) series->dz.push_back(dz_inc);
                mhat += dmhat;
                m += dm;
                ell += dell;
                x += dx;
            } else if (public_x) {
                // the public signal reveals the myopic action exactly, so all
                // three beliefs coincide
                mhat += dmhat;
                m = mhat;
                ell = mhat;
                x += ahat * dt;
                if (series) series->dz.push_back(0.0);
            } else {
                // infinitely noisy public signal: no information flows back,
                // the second-order belief is driven by own actions only
                const double dm =
                    (kappa1 * (a - (c.alpha0 + c.alpha2 * ell + c.alpha3 * m))) *
                        dt;
                mhat += dmhat;
                m += dm;
                if (series) series->dz.push_back(0.0);
            }
            y += dy;
        }

        pay += rows.back().discount *
               (term.psi0 + term.psi1 * last_ahat +
                term.psi2 * last_ahat * last_ahat);
        ens.theta[p] = theta;
        ens.payoff_discounted[p] = pay;
        ens.adaptation_cost[p] = adapt;
        ens.coordination_cost[p] = coord;
    }
    return ens;
}

RepresentationCheck representation_error(const EquilibriumSolution& solution,
                                         const PayoffSpec& spec,
                                         const GameParams& params, int n_paths,
                                         double dt, std::uint64_t seed) {
    const SimulatedEnsemble coarse = simulate_paths(
        solution, spec, params, n_paths, dt, seed, std::nullopt, {}, 2);
    const SimulatedEnsemble fine = simulate_paths(
        solution, spec, params, n_paths, 0.5 * dt, seed, std::nullopt, {}, 1);
    RepresentationCheck rc;
    rc.error = coarse.representation_sup;
    rc.error_refined = fine.representation_sup;
    rc.ratio = rc.error_refined > 0.0
                   ? rc.error / rc.error_refined
                   : std::numeric_limits<double>::infinity();
    return rc;
}

SecondMomentCheck second_moment_check(const SimulatedEnsemble& ensemble,
                                      const EquilibriumSolution& solution) {
    const TimeGrid& grid = solution.coefficients.grid;
    const double h = grid.dt();
    SecondMomentCheck out;
    out.passes = true;
    const int n = ensemble.n_paths;
    for (std::size_t cp = 0; cp < ensemble.checkpoint_times.size(); ++cp) {
        const double t = ensemble.checkpoint_times[cp];
        // gamma*chi at t by linear interpolation on the solution grid
        const double pos = t / h;
        const int q = std::min(static_cast<int>(pos), grid.n_steps - 1);
        const double w = pos - q;
        const CoefficientPoint& pa = solution.coefficients.points[q];
        const CoefficientPoint& pb = solution.coefficients.points[q + 1];
        const double gamma = pa.gamma + w * (pb.gamma - pa.gamma);
        const double chi = pa.chi + w * (pb.chi - pa.chi);
        const double target = gamma * chi;

        double mean = 0.0;
        for (int p = 0; p < n; ++p)
            mean += ensemble.m_at[cp][p] - ensemble.mhat_at[cp][p];
        mean /= n;
        double var = 0.0;
        for (int p = 0; p < n; ++p) {
            const double d =
                ensemble.m_at[cp][p] - ensemble.mhat_at[cp][p] - mean;
            var += d * d;
        }
        var = n > 1 ? var / (n - 1) : 0.0;

        double z = 0.0;
        if (target > 1e-14 || var > 1e-10) {
            const double se =
                std::max(var, target) * std::sqrt(2.0 / std::max(1, n - 1));
            z = (var - target) / se;
        }
        out.times.push_back(t);
        out.var_mc.push_back(var);
        out.var_identity.push_back(target);
        out.z.push_back(z);
        if (std::abs(z) > 4.0) out.passes = false;
    }
    return out;
}

PayoffEstimate payoff_estimate(const SimulatedEnsemble& ensemble) {
    PayoffEstimate pe;
    mean_se(ensemble.payoff_discounted, pe.mean, pe.se);
    mean_se(ensemble.adaptation_cost, pe.adaptation_mean, pe.adaptation_se);
    mean_se(ensemble.coordination_cost, pe.coordination_mean,
            pe.coordination_se);
    return pe;
}

std::vector<BestResponseRow> best_response_probe(
    const EquilibriumSolution& solution, const PayoffSpec& spec,
    const GameParams& params, const std::vector<BetaScale>& perturbations,
    int n_paths, std::uint64_t seed, double dt,
    const TerminalPayoffSpec& term) {
    const double dt_eff = dt > 0.0 ? dt : solution.coefficients.grid.dt();
    const SimulatedEnsemble base =
        simulate_paths(solution, spec, params, n_paths, dt_eff, seed,
                       std::nullopt, {}, 1, false, term);
    std::vector<BestResponseRow> rows;
    rows.reserve(perturbations.size());
    for (const BetaScale& dev : perturbations) {
        const SimulatedEnsemble run =
            simulate_paths(solution, spec, params, n_paths, dt_eff, seed,
                           std::nullopt, dev, 1, false, term);
        BestResponseRow row;
        row.deviation = dev;
        mean_se(run.payoff_discounted, row.payoff_mean, row.payoff_se);
        std::vector<double> diff(run.payoff_discounted.size());
        for (std::size_t i = 0; i < diff.size(); ++i)
            diff[i] = base.payoff_discounted[i] - run.payoff_discounted[i];
        mean_se(diff, row.diff_mean, row.diff_se);
        rows.push_back(row);
    }
    return rows;
}

std::vector<BetaScale> default_perturbations() {
    std::vector<BetaScale> out;
    for (int i = 1; i <= 3; ++i)
        for (double f : {1.1, 0.9}) {
            BetaScale s;
            s.scale[i] = f;
            out.push_back(s);
        }
    BetaScale up;
    up.scale = {1.0, 1.1, 1.1, 1.1};
    out.push_back(up);
    BetaScale down;
    down.scale = {1.0, 0.9, 0.9, 0.9};
    out.push_back(down);
    return out;
}

}  // namespace lme
