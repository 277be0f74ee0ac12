#pragma once
// Belief-dynamics right-hand sides: the (gamma, chi) system, its general
// (gamma1, gamma2, chi) extension with a nu-weighted action in the public
// signal, the private-value closed form chi(gamma), and the public-belief
// recursion coefficients.

#include "lme/errors.hpp"
#include "lme/payoffs.hpp"

namespace lme {

struct LearningState {
    double gamma = 1.0;  // myopic player's posterior variance of the type
    double chi = 0.0;    // weight of the type in the second-order belief
};

struct GeneralLearningState {
    double gamma1 = 1.0;  // myopic player's posterior variance
    double gamma2 = 0.0;  // long-run player's variance of his Mhat estimate
    double chi = 0.0;
};

struct ChiConstants {
    double c1 = 0.0, c2 = 0.0, d = 0.0;
};

struct LCoefficients {
    double l0 = 0.0, l1 = 0.0, B = 0.0;  // dL = (l0 + l1 L) dt + B dX
};

struct LearningRhs {
    double dgamma = 0.0, dchi = 0.0;
};

// Joint ODEs for (gamma, chi) given the current strategy coefficients.
// In the no-feedback regime the chi-damping term vanishes; in the public
// regime chi is identically zero and only gamma moves.
LearningRhs learning_rhs(const LearningState& state, double beta1, double beta3,
                         double delta1, const GameParams& params);

struct GeneralLearningRhs {
    double dgamma1 = 0.0, dgamma2 = 0.0, dchi = 0.0;
};

// Three-equation filtering system when the public signal carries nu*a in its
// drift. With nu = 0 and gamma2 = chi*gamma1 it reduces to learning_rhs.
GeneralLearningRhs learning_rhs_general(const GeneralLearningState& state,
                                        double beta1, double beta3,
                                        double delta1, const GameParams& params);

// Constants of the private-value closed form
//   chi(gamma) = c1 c2 (1 - rho^d) / (c1 + c2 rho^d),  rho = gamma/gamma0.
// Requires a nonzero myopic response slope uhat_hataa (otherwise the
// no-feedback form chi = 1 - gamma/gamma0 applies).
ChiConstants chi_constants(double uhat_hataa, double sigma_x, double sigma_y);

double chi_closed_form(double gamma, const ChiConstants& constants,
                       double gamma0);

double chi_no_feedback(double gamma, double gamma0);

// Drift/loading coefficients of the public-belief recursion
// dL = (l0 + l1 L) dt + B dX.
LCoefficients l_dynamics_coefficients(const LearningState& state, double delta0,
                                      double delta1, double delta2,
                                      double sigma_x);

}  // namespace lme
