#include "lme/learning.hpp"

#include <cmath>

namespace lme {

LearningRhs learning_rhs(const LearningState& state, double beta1, double beta3,
                         double delta1, const GameParams& params) {
    const double sy2 = params.sigma_y * params.sigma_y;
    LearningRhs out;
    if (params.sigma_x.is_zero()) {
        // public regime: chi == 0, gamma driven by the theta-loading beta3
        out.dgamma = -state.gamma * state.gamma * beta3 * beta3 / sy2;
        out.dchi = 0.0;
        return out;
    }
    const double alpha3 = beta3 + beta1 * state.chi;
    out.dgamma = -state.gamma * state.gamma * alpha3 * alpha3 / sy2;
    out.dchi = state.gamma * alpha3 * alpha3 * (1.0 - state.chi) / sy2;
    if (params.sigma_x.is_finite()) {
        const double sx2 = params.sigma_x.value * params.sigma_x.value;
        out.dchi -= state.gamma * state.chi * state.chi * delta1 * delta1 / sx2;
    }
    return out;
}

GeneralLearningRhs learning_rhs_general(const GeneralLearningState& state,
                                        double beta1, double beta3,
                                        double delta1, const GameParams& params) {
    const double sy2 = params.sigma_y * params.sigma_y;
    const double sx2 = params.sigma_x.is_finite()
                           ? params.sigma_x.value * params.sigma_x.value
                           : 0.0;
    const double inv_sx2 = params.sigma_x.is_finite() ? 1.0 / sx2 : 0.0;
    const double alpha = beta3 + beta1 * state.chi;
    const double Sigma = params.nu * params.nu * inv_sx2 + 1.0 / sy2;

    const double g1 = state.gamma1;
    const double g2 = state.gamma2;
    const double cross = params.nu * g1 * alpha + g2 * delta1;

    GeneralLearningRhs out;
    out.dgamma1 = -g1 * g1 * alpha * alpha * Sigma;
    out.dgamma2 = -2.0 * g2 * g1 * alpha * alpha * Sigma +
                  g1 * g1 * alpha * alpha * Sigma - cross * cross * inv_sx2;
    out.dchi = g1 * alpha * alpha * Sigma * (1.0 - state.chi) -
               (params.nu * alpha + delta1 * state.chi) * cross * inv_sx2;
    return out;
}

ChiConstants chi_constants(double uhat_hataa, double sigma_x, double sigma_y) {
    if (uhat_hataa == 0.0)
        throw ZeroSignalResponse(
            "myopic response slope is zero; use chi_no_feedback");
    const double k =
        sigma_y * sigma_y * uhat_hataa * uhat_hataa / (sigma_x * sigma_x);
    const double root = std::sqrt(1.0 + 4.0 * k);
    ChiConstants c;
    // rationalized form of (root - 1) / (2k); avoids cancellation as k -> 0
    c.c2 = 2.0 / (root + 1.0);
    c.c1 = (root + 1.0) / (2.0 * k);
    c.d = root;  // equals k*(c1 + c2)
    return c;
}

double chi_closed_form(double gamma, const ChiConstants& constants,
                       double gamma0) {
    const double rho = std::pow(gamma / gamma0, constants.d);
    return constants.c1 * constants.c2 * (1.0 - rho) /
           (constants.c1 + constants.c2 * rho);
}

double chi_no_feedback(double gamma, double gamma0) {
    return 1.0 - gamma / gamma0;
}

LCoefficients l_dynamics_coefficients(const LearningState& state, double delta0,
                                      double delta1, double delta2,
                                      double sigma_x) {
    const double den = sigma_x * sigma_x * (1.0 - state.chi);
    const double g = state.gamma, c = state.chi;
    LCoefficients out;
    out.l0 = -g * c * delta0 * delta1 / den;
    out.l1 = -g * c * delta1 * (delta1 + delta2) / den;
    out.B = g * c * delta1 / den;
    return out;
}

}  // namespace lme
