#pragma once
// Euler-Maruyama simulation of equilibrium sample paths and Monte-Carlo
// verification: filtering identities, second moments, payoff and
// coordination-cost estimates, and best-response probes.
//
// The signal structure is dY = a dt + sigma_Y dZ^Y (observed by the myopic
// player only) and dX = (ahat + nu a) dt + sigma_X dZ^X (public). Per path
// the simulator evolves
//   Mhat  - the myopic player's posterior mean of theta, filtered from his
//           private Y innovations (plus X when nu != 0),
//   M     - the long-run player's estimate of Mhat, filtered from the public
//           X innovations with her own action known,
//   L     - the public posterior mean of theta, driven by X alone,
// with coefficients and the deterministic (gamma, chi) paths taken from a
// solved equilibrium. Degenerate monitoring collapses the states exactly:
// sigma_X = 0 forces M = L = Mhat, sigma_X = infinity freezes L at the prior
// mean and makes M drift-only.
//
// Noise is counter-based (seed, path, step), so ensembles are reproducible
// and dt-refinement runs can share one Brownian path: a run with
// noise_substeps = k sums k sub-normals per step, which makes (dt, k=2) and
// (dt/2, k=1) agree increment-by-increment.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "lme/assemble.hpp"
#include "lme/fields.hpp"
#include "lme/payoffs.hpp"

namespace lme {

// One-point filter coefficients for the myopic player's belief: the drift of
// Mhat is kappa0 + kappa1 a + kappa2 Mhat against the realized action a, and
// the loadings on the standardized signal noises are BY and BX.
struct FilterCoefficients {
    double kappa0 = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double BX = 0.0;
    double BY = 0.0;
};

FilterCoefficients filter_coefficients(double alpha0, double alpha2,
                                       double alpha3, double gamma, double ell,
                                       const GameParams& params);

// Coefficients of the public-belief recursion dL = (l0 + l1 L) dt + B dX.
struct LRecursion {
    double l0 = 0.0;
    double l1 = 0.0;
    double B = 0.0;
};

LRecursion l_recursion(const std::array<double, 3>& delta, double gamma,
                       double chi, double sigma_x);

// Multiplicative offsets on the long-run player's strategy weights
// (beta0..beta3); identity scales reproduce equilibrium play. Deviations are
// hidden: the myopic player keeps filtering under the equilibrium conjecture.
struct BetaScale {
    std::array<double, 4> scale{1.0, 1.0, 1.0, 1.0};
    bool is_identity() const {
        return scale[0] == 1.0 && scale[1] == 1.0 && scale[2] == 1.0 &&
               scale[3] == 1.0;
    }
};

// Full per-step series for one path (kept only when requested: the series
// are diagnostic and grow as n_steps per path).
struct PathSeries {
    std::vector<double> a, ahat, y, x, mhat, m, ell, dz;
};

struct SimulatedEnsemble {
    int n_paths = 0;
    int n_steps = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;

    std::vector<double> theta;  // per path

    // per-path payoff components: discounted flow + discounted terminal lump,
    // and the undiscounted leadership decomposition integrals
    std::vector<double> payoff_discounted;
    std::vector<double> adaptation_cost;   // integral of (a - theta)^2
    std::vector<double> coordination_cost; // integral of (a - ahat)^2

    // cross-sectional snapshots at fixed fractions of the horizon
    std::vector<double> checkpoint_times;
    std::vector<std::vector<double>> mhat_at, m_at, ell_at;  // [cp][path]

    // sup over paths and steps of |M - (chi theta + (1-chi) L)|
    double representation_sup = 0.0;
    // sup of the algebraic identity
    // (beta-form a) - (alpha-form a) = beta1 (M - chi theta - (1-chi) L),
    // which must hold to rounding error regardless of discretization
    double strategy_identity_sup = 0.0;

    std::vector<PathSeries> series;  // filled only with store_series
};

SimulatedEnsemble simulate_paths(
    const EquilibriumSolution& solution, const PayoffSpec& spec,
    const GameParams& params, int n_paths, double dt, std::uint64_t seed,
    std::optional<double> fixed_theta = std::nullopt,
    const BetaScale& deviation = {}, int noise_substeps = 1,
    bool store_series = false, const TerminalPayoffSpec& term = {});

// Two coupled runs (dt with doubled substeps, dt/2 on the same Brownian
// path); the representation error must shrink under refinement on-path.
struct RepresentationCheck {
    double error = 0.0;
    double error_refined = 0.0;
    double ratio = 0.0;  // error / error_refined
};

RepresentationCheck representation_error(const EquilibriumSolution& solution,
                                         const PayoffSpec& spec,
                                         const GameParams& params, int n_paths,
                                         double dt, std::uint64_t seed);

// Cross-sectional Var(M - Mhat) against the gamma*chi identity at the
// ensemble's checkpoint times; z-scores use the sample variance of a
// Gaussian cross-section.
struct SecondMomentCheck {
    std::vector<double> times;
    std::vector<double> var_mc;
    std::vector<double> var_identity;
    std::vector<double> z;
    bool passes = false;  // all |z| <= 4
};

SecondMomentCheck second_moment_check(const SimulatedEnsemble& ensemble,
                                      const EquilibriumSolution& solution);

// Mean +- standard error of the stored per-path payoff components.
struct PayoffEstimate {
    double mean = 0.0;
    double se = 0.0;
    double adaptation_mean = 0.0;
    double adaptation_se = 0.0;
    double coordination_mean = 0.0;
    double coordination_se = 0.0;
};

PayoffEstimate payoff_estimate(const SimulatedEnsemble& ensemble);

// Common-random-number comparison of the equilibrium strategy against
// multiplicative perturbations of the beta-weights. diff = equilibrium
// payoff minus perturbed payoff, per path.
struct BestResponseRow {
    BetaScale deviation;
    double payoff_mean = 0.0;
    double payoff_se = 0.0;
    double diff_mean = 0.0;
    double diff_se = 0.0;
};

std::vector<BestResponseRow> best_response_probe(
    const EquilibriumSolution& solution, const PayoffSpec& spec,
    const GameParams& params, const std::vector<BetaScale>& perturbations,
    int n_paths, std::uint64_t seed, double dt = 0.0,
    const TerminalPayoffSpec& term = {});

// +-10% on each of beta1, beta2, beta3, and jointly on all three.
std::vector<BetaScale> default_perturbations();

}  // namespace lme
