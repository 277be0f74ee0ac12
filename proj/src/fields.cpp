#include "lme/fields.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace lme {

namespace {

constexpr double kChiMax = 1.0 - 1e-10;
constexpr double kLoadingFloor = 1e-10;
constexpr double kCondLimit = 1e12;

// ---- small polynomial helpers ----------------------------------------------
// Quadratic forms over (theta, m, ell): coefficient vectors indexed by
// monomial. Products of linear forms are enough to assemble the HJB flow.

enum Mono3 : int { kC = 0, kTh, kM, kL, kTh2, kM2, kL2, kThM, kThL, kML };

struct Lin3 {
    double c = 0.0, th = 0.0, m = 0.0, l = 0.0;
};

using Quad3 = std::array<double, 10>;

Quad3 prod(const Lin3& a, const Lin3& b) {
    Quad3 q{};
    q[kC] = a.c * b.c;
    q[kTh] = a.c * b.th + a.th * b.c;
    q[kM] = a.c * b.m + a.m * b.c;
    q[kL] = a.c * b.l + a.l * b.c;
    q[kTh2] = a.th * b.th;
    q[kM2] = a.m * b.m;
    q[kL2] = a.l * b.l;
    q[kThM] = a.th * b.m + a.m * b.th;
    q[kThL] = a.th * b.l + a.l * b.th;
    q[kML] = a.m * b.l + a.l * b.m;
    return q;
}

void add_scaled(Quad3& q, double s, const Quad3& p) {
    for (int i = 0; i < 10; ++i) q[i] += s * p[i];
}

void add_scaled(Quad3& q, double s, const Lin3& p) {
    q[kC] += s * p.c;
    q[kTh] += s * p.th;
    q[kM] += s * p.m;
    q[kL] += s * p.l;
}

// Quadratic forms over (theta, m) for the reduced (two-state) regimes.

enum Mono2 : int { k2C = 0, k2Th, k2M, k2Th2, k2M2, k2ThM };

struct Lin2 {
    double c = 0.0, th = 0.0, m = 0.0;
};

using Quad2 = std::array<double, 6>;

Quad2 prod(const Lin2& a, const Lin2& b) {
    Quad2 q{};
    q[k2C] = a.c * b.c;
    q[k2Th] = a.c * b.th + a.th * b.c;
    q[k2M] = a.c * b.m + a.m * b.c;
    q[k2Th2] = a.th * b.th;
    q[k2M2] = a.m * b.m;
    q[k2ThM] = a.th * b.m + a.m * b.th;
    return q;
}

void add_scaled(Quad2& q, double s, const Quad2& p) {
    for (int i = 0; i < 6; ++i) q[i] += s * p[i];
}

void add_scaled(Quad2& q, double s, const Lin2& p) {
    q[k2C] += s * p.c;
    q[k2Th] += s * p.th;
    q[k2M] += s * p.m;
}

template <int N>
void check_condition(const Eigen::FullPivLU<Eigen::Matrix<double, N, N>>& lu) {
    const auto diag = lu.matrixLU().diagonal().cwiseAbs();
    const double pmax = diag.maxCoeff();
    const double pmin = diag.minCoeff();
    if (!(pmin > 0.0) || pmax / pmin > kCondLimit) {
        throw SingularMatching(
            "coefficient-matching system is numerically singular",
            pmin > 0.0 ? pmax / pmin : std::numeric_limits<double>::infinity());
    }
}

// ---- full interior matcher --------------------------------------------------
// States (theta, m, ell); unknown time-derivatives of (beta0..beta3) are
// pinned by the chain rule applied to the first-order-condition expressions
// of (v2, v5, v7, v9), with the quadratic rows of the HJB flow matched
// directly for v6 and v8.

FieldDerivatives interior_matcher(const CoefficientState& st,
                                  const PayoffSpec& sp, const GameParams& pp) {
    const double sx = pp.sigma_x.value;
    const double sx2 = sx * sx;
    const double sy2 = pp.sigma_y * pp.sigma_y;
    const double g = st.gamma;
    const double chi = std::min(st.chi, kChiMax);
    const double omc = 1.0 - chi;
    const double b0 = st.beta0, b1 = st.beta1, b2 = st.beta2, b3 = st.beta3;
    const double v6n = st.v6 / sp.scale_u, v8n = st.v8 / sp.scale_u;

    const double a0 = b0;
    const double a2 = b2 + b1 * omc;
    const double a3 = b3 + b1 * chi;
    if (std::abs(a3) < kLoadingFloor) {
        throw SingularMatching(
            "conjectured type loading vanishes; first-order matching is singular",
            std::numeric_limits<double>::infinity());
    }
    const MyopicResponse d = myopic_response(sp, a0, a2, a3);

    const LearningRhs lr =
        learning_rhs(LearningState{g, chi}, b1, b3, d.delta1, pp);

    const double kY = g * a3 / sy2;
    const double cL = g * chi * d.delta1 * d.delta1 / (sx2 * omc);
    const double sM = chi * g * d.delta1 / sx;
    const double sL = sM / omc;

    // first-order value coefficients implied by the optimality condition
    const double v2 = (b0 - sp.u0 - sp.u_ahata * d.delta0) / kY;
    const double v5 = (b1 - sp.u_ahata * d.delta1) / (2.0 * kY);
    const double v7 = (b3 - sp.u_atheta) / kY;
    const double v9 = (b2 - sp.u_ahata * d.delta2) / kY;

    // assemble the HJB flow G as a quadratic form in (theta, m, ell)
    const Lin3 astar{b0, b3, b1, b2};
    const Lin3 ahat{d.delta0, 0.0, d.delta1, d.delta2};
    const Lin3 theta{0.0, 1.0, 0.0, 0.0};

    Quad3 G{};
    G[kC] += sp.u_const;
    add_scaled(G, sp.u0, astar);
    add_scaled(G, sp.u_hat0, ahat);
    add_scaled(G, sp.u_theta0, theta);
    add_scaled(G, -0.5, prod(astar, astar));
    add_scaled(G, 0.5 * sp.u_hatahata, prod(ahat, ahat));
    add_scaled(G, 0.5 * sp.u_thetatheta, prod(theta, theta));
    add_scaled(G, sp.u_ahata, prod(astar, ahat));
    add_scaled(G, sp.u_atheta, prod(astar, theta));
    add_scaled(G, sp.u_hatatheta, prod(ahat, theta));
    // conditional variance of the myopic action under the leader's filter
    G[kC] += 0.5 * sp.u_hatahata * d.delta1 * d.delta1 * g * chi;

    const Lin3 Vm{v2, v7, 2.0 * v5, v9};
    const Lin3 Vl{0.0, v8n, v9, 2.0 * v6n};  // v3 = 0 on the supported domain
    const Lin3 muM{kY * (b0 - a0), kY * b3, kY * (b1 - a3), kY * (b2 - a2)};
    const Lin3 muL{0.0, 0.0, cL, -cL};
    add_scaled(G, 1.0, prod(muM, Vm));
    add_scaled(G, 1.0, prod(muL, Vl));
    G[kC] += sM * sM * v5 + sM * sL * v9 + sL * sL * v6n;

    // chain rule: each FOC coefficient is n(beta, chi)/(mult * kY); its time
    // derivative must equal r*v - [G]_row.
    const double uu = sp.u_ahata * sp.uhat_hataa;
    const double kY_b1 = g * chi / sy2;
    const double kY_b3 = g / sy2;
    const double kY_g = a3 / sy2;
    const double kY_chi = g * b1 / sy2;

    struct Row {
        double n_b0, n_b1, n_b2, n_b3, n_chi;  // numerator partials
        double mult;                           // kY multiplier in denominator
        double v;                              // current value
        double grow;                           // matched coefficient of G
    };
    const Row rows[4] = {
        {1.0 - uu, 0.0, 0.0, 0.0, 0.0, 1.0, v2, G[kM]},
        {0.0, 1.0 - uu * chi, 0.0, -uu, -uu * b1, 2.0, v5, G[kM2]},
        {0.0, 0.0, 0.0, 1.0, 0.0, 1.0, v7, G[kThM]},
        {0.0, -uu * omc, 1.0 - uu, 0.0, uu * b1, 1.0, v9, G[kML]},
    };

    Eigen::Matrix4d A;
    Eigen::Vector4d rhs;
    for (int i = 0; i < 4; ++i) {
        const Row& w = rows[i];
        const double inv = 1.0 / (w.mult * kY);
        A(i, 0) = w.n_b0 * inv;  // kY does not depend on beta0
        A(i, 1) = w.n_b1 * inv - w.v * kY_b1 / kY;
        A(i, 2) = w.n_b2 * inv;  // nor on beta2
        A(i, 3) = w.n_b3 * inv - w.v * kY_b3 / kY;
        const double dv_g = -w.v * kY_g / kY;
        const double dv_chi = w.n_chi * inv - w.v * kY_chi / kY;
        rhs(i) = pp.r * w.v - w.grow - dv_g * lr.dgamma - dv_chi * lr.dchi;
    }
    Eigen::FullPivLU<Eigen::Matrix4d> lu(A);
    check_condition<4>(lu);
    const Eigen::Vector4d bdot = lu.solve(rhs);

    FieldDerivatives out;
    out.dbeta0 = bdot(0);
    out.dbeta1 = bdot(1);
    out.dbeta2 = bdot(2);
    out.dbeta3 = bdot(3);
    out.dv6 = pp.r * st.v6 - sp.scale_u * G[kL2];
    out.dv8 = pp.r * st.v8 - sp.scale_u * G[kThL];
    out.dgamma = lr.dgamma;
    out.dchi = lr.dchi;
    out.v2 = sp.scale_u * v2;
    out.v5 = sp.scale_u * v5;
    out.v7 = sp.scale_u * v7;
    out.v9 = sp.scale_u * v9;
    out.flow0 = -sp.scale_u * G[kC];
    out.flow1 = -sp.scale_u * G[kTh];
    out.flow3 = -sp.scale_u * G[kL];
    out.flow4 = -sp.scale_u * G[kTh2];
    return out;
}

// ---- reduced (two-state) matcher ---------------------------------------------
// Covers the public-beliefs limit (sigma_X = 0, chi = 0) and the no-feedback
// limit (sigma_X = infinity). The two differ in the myopic player's
// information: in the public limit past play reveals the average action, so
// his response slope sees the total weight beta1 + beta3, while the Kalman
// gain only sees beta3; in the no-feedback limit the conjectured intercept
// carries the prior mean through beta1 (1 - chi) mu.

struct ReducedSetup {
    double kY = 0.0;
    double conj0 = 0.0, conjm = 0.0;  // public conjecture of a given Mhat = m
    double d0 = 0.0, dm = 0.0;        // myopic reply ahat = d0 + dm * m
    double corr = 0.0;                // flow correction from Var(ahat)
    double sigM = 0.0;                // volatility of the m state
    double gdot = 0.0, chidot = 0.0;
    // numerator partials of (w2, w4, w5) FOC expressions
    double n2_b0 = 0.0, n2_b1 = 0.0, n2_b3 = 0.0, n2_chi = 0.0;
    double n4_b1 = 0.0, n4_b3 = 0.0, n4_chi = 0.0;
    double kY_b1 = 0.0, kY_b3 = 0.0, kY_g = 0.0, kY_chi = 0.0;
};

FieldDerivatives reduced_matcher(const CoefficientState& st,
                                 const PayoffSpec& sp, const GameParams& pp,
                                 const ReducedSetup& su, double chi) {
    const double b0 = st.beta0, b1 = st.beta1, b3 = st.beta3;
    const double kY = su.kY;

    const double w2 = (b0 - sp.u0 - sp.u_ahata * su.d0) / kY;
    const double w4 = (b1 - sp.u_ahata * su.dm) / (2.0 * kY);
    const double w5 = (b3 - sp.u_atheta) / kY;

    const Lin2 astar{b0, b3, b1};
    const Lin2 ahat{su.d0, 0.0, su.dm};
    const Lin2 theta{0.0, 1.0, 0.0};

    Quad2 G{};
    G[k2C] += sp.u_const + su.corr;
    add_scaled(G, sp.u0, astar);
    add_scaled(G, sp.u_hat0, ahat);
    add_scaled(G, sp.u_theta0, theta);
    add_scaled(G, -0.5, prod(astar, astar));
    add_scaled(G, 0.5 * sp.u_hatahata, prod(ahat, ahat));
    add_scaled(G, 0.5 * sp.u_thetatheta, prod(theta, theta));
    add_scaled(G, sp.u_ahata, prod(astar, ahat));
    add_scaled(G, sp.u_atheta, prod(astar, theta));
    add_scaled(G, sp.u_hatatheta, prod(ahat, theta));

    const Lin2 Wm{w2, w5, 2.0 * w4};
    const Lin2 muM{kY * (b0 - su.conj0), kY * b3, kY * (b1 - su.conjm)};
    add_scaled(G, 1.0, prod(muM, Wm));
    G[k2C] += su.sigM * su.sigM * w4;

    struct Row {
        double n_b0, n_b1, n_b3, n_chi, mult, v, grow;
    };
    const Row rows[3] = {
        {su.n2_b0, su.n2_b1, su.n2_b3, su.n2_chi, 1.0, w2, G[k2M]},
        {0.0, su.n4_b1, su.n4_b3, su.n4_chi, 2.0, w4, G[k2M2]},
        {0.0, 0.0, 1.0, 0.0, 1.0, w5, G[k2ThM]},
    };

    Eigen::Matrix3d A;
    Eigen::Vector3d rhs;
    for (int i = 0; i < 3; ++i) {
        const Row& w = rows[i];
        const double inv = 1.0 / (w.mult * kY);
        A(i, 0) = w.n_b0 * inv;
        A(i, 1) = w.n_b1 * inv - w.v * su.kY_b1 / kY;
        A(i, 2) = w.n_b3 * inv - w.v * su.kY_b3 / kY;
        const double dv_g = -w.v * su.kY_g / kY;
        const double dv_chi = w.n_chi * inv - w.v * su.kY_chi / kY;
        rhs(i) = pp.r * w.v - w.grow - dv_g * su.gdot - dv_chi * su.chidot;
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
    check_condition<3>(lu);
    const Eigen::Vector3d bdot = lu.solve(rhs);

    FieldDerivatives out;
    out.dbeta0 = bdot(0);
    out.dbeta1 = bdot(1);
    out.dbeta3 = bdot(2);
    out.dgamma = su.gdot;
    out.dchi = su.chidot;
    out.v2 = sp.scale_u * w2;
    out.v5 = sp.scale_u * w4;
    out.v7 = sp.scale_u * w5;
    out.flow0 = -sp.scale_u * G[k2C];
    out.flow1 = -sp.scale_u * G[k2Th];
    out.flow4 = -sp.scale_u * G[k2Th2];
    (void)chi;
    return out;
}

FieldDerivatives nofeedback_matcher(const CoefficientState& st,
                                    const PayoffSpec& sp,
                                    const GameParams& pp) {
    const double sy2 = pp.sigma_y * pp.sigma_y;
    const double g = st.gamma;
    const double chi = std::min(st.chi, kChiMax);
    const double omc = 1.0 - chi;
    const double b1 = st.beta1, b3 = st.beta3;
    const double a3 = b3 + b1 * chi;
    if (std::abs(a3) < kLoadingFloor) {
        throw SingularMatching(
            "conjectured type loading vanishes; first-order matching is singular",
            std::numeric_limits<double>::infinity());
    }
    const double uu = sp.u_ahata * sp.uhat_hataa;

    ReducedSetup su;
    su.kY = g * a3 / sy2;
    su.conj0 = st.beta0 + b1 * omc * pp.mu;
    su.conjm = a3;
    su.d0 = sp.uhat0 + sp.uhat_hataa * su.conj0;
    su.dm = sp.uhat_hatatheta + sp.uhat_hataa * a3;
    su.corr = 0.5 * sp.u_hatahata * su.dm * su.dm * g * chi;
    su.sigM = 0.0;
    su.gdot = -g * g * a3 * a3 / sy2;
    su.chidot = g * a3 * a3 * omc / sy2;
    su.n2_b0 = 1.0 - uu;
    su.n2_b1 = -uu * omc * pp.mu;
    su.n2_chi = uu * b1 * pp.mu;
    su.n4_b1 = 1.0 - uu * chi;
    su.n4_b3 = -uu;
    su.n4_chi = -uu * b1;
    su.kY_b1 = g * chi / sy2;
    su.kY_b3 = g / sy2;
    su.kY_g = a3 / sy2;
    su.kY_chi = g * b1 / sy2;
    return reduced_matcher(st, sp, pp, su, chi);
}

FieldDerivatives public_matcher(const CoefficientState& st,
                                const PayoffSpec& sp, const GameParams& pp) {
    const double sy2 = pp.sigma_y * pp.sigma_y;
    const double g = st.gamma;
    const double b1 = st.beta1, b3 = st.beta3;
    if (std::abs(b3) < kLoadingFloor) {
        throw SingularMatching(
            "type loading vanishes; first-order matching is singular",
            std::numeric_limits<double>::infinity());
    }
    const double uu = sp.u_ahata * sp.uhat_hataa;

    ReducedSetup su;
    su.kY = g * b3 / sy2;
    su.conj0 = st.beta0;
    su.conjm = b1 + b3;
    su.d0 = sp.uhat0 + sp.uhat_hataa * st.beta0;
    su.dm = sp.uhat_hatatheta + sp.uhat_hataa * (b1 + b3);
    su.corr = 0.0;
    su.sigM = g * b3 / pp.sigma_y;
    su.gdot = -g * g * b3 * b3 / sy2;
    su.chidot = 0.0;
    su.n2_b0 = 1.0 - uu;
    su.n4_b1 = 1.0 - uu;
    su.n4_b3 = -uu;
    su.kY_b3 = g / sy2;
    su.kY_g = b3 / sy2;
    return reduced_matcher(st, sp, pp, su, 0.0);
}

}  // namespace

FieldDerivatives field_general(const CoefficientState& state,
                               const PayoffSpec& spec,
                               const GameParams& params) {
    switch (params.sigma_x.kind) {
        case SigmaX::Kind::finite:
            return interior_matcher(state, spec, params);
        case SigmaX::Kind::infinite:
            return nofeedback_matcher(state, spec, params);
        case SigmaX::Kind::zero:
            return public_matcher(state, spec, params);
    }
    throw ConfigError("unknown sigma_x regime");
}

// ---- hand-written systems ----------------------------------------------------

std::array<double, 4> field_public_backward(const std::array<double, 4>& state,
                                            const GameParams& params) {
    const double b0 = state[0], b1 = state[1], b3 = state[2], g = state[3];
    const double sy2 = params.sigma_y * params.sigma_y;
    const double r = params.r;
    const double fb0 = 2.0 * r * b0 * b3;
    const double fb1 = b1 * b3 * b3 * g / sy2 + 2.0 * r * b1 * b3 - r * b3;
    const double fb3 = -b1 * b3 * b3 * g / sy2 + 2.0 * r * b3 * b3 - r * b3;
    const double fg = -b3 * b3 * g * g / sy2;
    return {-fb0, -fb1, -fb3, -fg};
}

std::array<double, 4> field_nofeedback_backward(const std::array<double, 4>& state,
                                                const GameParams& params) {
    const double b0 = state[0], b1 = state[1], b3 = state[2], g = state[3];
    const double sy2 = params.sigma_y * params.sigma_y;
    const double r = params.r;
    const double chi = chi_no_feedback(g, params.gamma0);
    const double al = b1 * chi + b3;
    const double fb0 = -al * (r * b0 * (chi - 2.0) -
                              g * b1 * b1 * (1.0 - chi) / sy2 +
                              0.5 * r * (1.0 - chi));
    const double fb1 = al * (-g * b1 * b1 * (1.0 - chi) / sy2 +
                             g * b1 * b3 / sy2 - r * b1 * (chi - 2.0) - 0.5 * r);
    const double fb3 =
        -al * (g * b1 * b3 / sy2 + r * (chi - 2.0) * (b3 - 0.5));
    const double fg = -g * g * al * al / sy2;
    return {-fb0, -fb1, -fb3, -fg};
}

std::array<double, 6> field_private_interior(const std::array<double, 6>& state,
                                             const GameParams& params,
                                             const ChiConstants& chi_map) {
    const double v6p = state[0], v8p = state[1];
    const double b1 = state[2], b2 = state[3], b3 = state[4], g = state[5];
    const double sx2 = params.sigma_x.value * params.sigma_x.value;
    const double sy2 = params.sigma_y * params.sigma_y;
    const double chi = chi_closed_form(g, chi_map, params.gamma0);
    if (chi >= kChiMax) {
        throw ChiSaturated(
            "past-play weight saturated at one inside the interior system");
    }
    const double omc = 1.0 - chi;
    const double al = b3 + b1 * chi;
    const double pref = al * g / (2.0 * sx2 * sy2 * omc);
    const double damp = al * al * g * chi / (sx2 * omc);

    std::array<double, 6> f{};
    f[0] = b2 * b2 + 2.0 * b1 * b2 * omc - b1 * b1 * omc * omc +
           2.0 * v6p * damp;
    f[1] = -2.0 * b2 - 2.0 * (1.0 - 2.0 * al) * b1 * omc -
           4.0 * b1 * b1 * chi * omc + v8p * damp;
    f[2] = pref * (2.0 * sx2 * (al - b1) * b1 * omc - al * al * b1 * g * chi * v8p -
                   2.0 * sy2 * al * chi *
                       (b2 - b1 * (1.0 - chi - 2.0 * b2 * chi)));
    f[3] = pref * (2.0 * sx2 * b1 * b1 * omc * omc +
                   2.0 * sy2 * al * b2 * chi * chi * (1.0 - 2.0 * b2) -
                   al * al * g * chi * (2.0 * v6p + b2 * v8p));
    f[4] = pref * (-2.0 * sx2 * b1 * omc * b3 +
                   2.0 * sy2 * al * b2 * chi * chi * (1.0 - 2.0 * b3) -
                   al * al * b3 * g * chi * v8p);
    f[5] = -g * g * al * al / sy2;
    return f;
}

std::array<double, 7> field_common_value(const TildeState& state,
                                         const PayoffSpec& spec,
                                         const GameParams& params) {
    const double uh_t = spec.uhat_hatatheta;
    const double uh_a = spec.uhat_hataa;
    const double sx2 = params.sigma_x.value * params.sigma_x.value;
    const double sy2 = params.sigma_y * params.sigma_y;
    const double g = state.gamma;
    const double chi = state.chi;
    const double omc = 1.0 - chi;
    if (omc < 1e-10) {
        throw ChiSaturated("past-play weight saturated at one in the tilde system");
    }

    // undo the change of variables (value coefficients in raw payoff units of
    // the leadership flow, own-action curvature 4)
    const double v6r = state.tv6 * omc * omc / g;
    const double v8r = state.tv8 * omc / g;
    const double b1 = state.beta1, b3 = state.beta3;
    const double b2 = state.tbeta2 * omc;
    const double v6 = v6r / 4.0;
    const double v8 = v8r / 4.0;

    const double a2 = b2 + b1 * omc;
    const double a3 = b3 + b1 * chi;
    if (std::abs(a3) < kLoadingFloor) {
        throw SingularMatching(
            "conjectured type loading vanishes in the tilde system",
            std::numeric_limits<double>::infinity());
    }
    const double d1 = uh_t + uh_a * a3;
    const double d2 = uh_a * a2;
    const double kY = g * a3 / sy2;
    const double cL = g * chi * d1 * d1 / (sx2 * omc);
    const double v5 = (b1 - 0.5 * d1) / (2.0 * kY);
    const double v7 = (b3 - 0.5) / kY;
    const double v9 = (b2 - 0.5 * d2) / kY;

    const double gdot = -g * g * a3 * a3 / sy2;
    const double chidot =
        g * a3 * a3 * omc / sy2 - g * chi * chi * d1 * d1 / sx2;

    // quadratic rows of the HJB flow, written out structurally
    const double G_m2 = -0.5 * b1 * b1 - 0.25 * d1 * d1 + 0.5 * b1 * d1 +
                        2.0 * kY * (b1 - a3) * v5 + cL * v9;
    const double G_thm = -b1 * b3 + 0.5 * b3 * d1 + 0.5 * b1 +
                         kY * ((b1 - a3) * v7 + 2.0 * b3 * v5) + cL * v8;
    const double G_ml = -b1 * b2 - 0.5 * d1 * d2 + 0.5 * (b1 * d2 + b2 * d1) +
                        kY * ((b1 - a3) * v9 + 2.0 * (b2 - a2) * v5) +
                        2.0 * cL * v6 - cL * v9;
    const double G_l2 = -0.5 * b2 * b2 - 0.25 * d2 * d2 + 0.5 * b2 * d2 +
                        kY * (b2 - a2) * v9 - 2.0 * cL * v6;
    const double G_thl = -b2 * b3 + 0.5 * b3 * d2 + 0.5 * b2 +
                         kY * ((b2 - a2) * v7 + b3 * v9) - cL * v8;

    // chain rule for (v5, v7, v9); unknowns are (db1, db2, db3)
    const double kY_p[3] = {g * chi / sy2, 0.0, g / sy2};
    const double kY_g = a3 / sy2;
    const double kY_chi = g * b1 / sy2;
    const double n5_p[3] = {1.0 - 0.5 * uh_a * chi, 0.0, -0.5 * uh_a};
    const double n7_p[3] = {0.0, 0.0, 1.0};
    const double n9_p[3] = {-0.5 * uh_a * omc, 1.0 - 0.5 * uh_a, 0.0};
    const double n5_chi = -0.5 * uh_a * b1;
    const double n9_chi = 0.5 * uh_a * b1;

    Eigen::Matrix3d A;
    Eigen::Vector3d rhs;
    const struct {
        const double* np;
        double n_chi, mult, v, grow;
    } rows[3] = {
        {n5_p, n5_chi, 2.0, v5, G_m2},
        {n7_p, 0.0, 1.0, v7, G_thm},
        {n9_p, n9_chi, 1.0, v9, G_ml},
    };
    for (int i = 0; i < 3; ++i) {
        const double inv = 1.0 / (rows[i].mult * kY);
        for (int j = 0; j < 3; ++j) {
            A(i, j) = rows[i].np[j] * inv - rows[i].v * kY_p[j] / kY;
        }
        const double dv_g = -rows[i].v * kY_g / kY;
        const double dv_chi = rows[i].n_chi * inv - rows[i].v * kY_chi / kY;
        rhs(i) = params.r * rows[i].v - rows[i].grow - dv_g * gdot -
                 dv_chi * chidot;
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
    check_condition<3>(lu);
    const Eigen::Vector3d bdot = lu.solve(rhs);

    const double v6dot_r = params.r * v6r - 4.0 * G_l2;
    const double v8dot_r = params.r * v8r - 4.0 * G_thl;

    std::array<double, 7> f{};
    f[0] = (v6dot_r * g + v6r * gdot) / (omc * omc) +
           2.0 * state.tv6 * chidot / omc;
    f[1] = (v8dot_r * g + v8r * gdot) / omc + state.tv8 * chidot / omc;
    f[2] = bdot(0);
    f[3] = bdot(1) / omc + state.tbeta2 * chidot / omc;
    f[4] = bdot(2);
    f[5] = gdot;
    f[6] = chidot;
    return f;
}

}  // namespace lme
