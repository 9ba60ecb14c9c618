#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "rsp/errors.hpp"
#include "rsp/linalg.hpp"
#include "rsp/schedules.hpp"
#include "rsp/spectral.hpp"

namespace rsp {

// Asymptotic covariance: the distributional limit is
//   n^rate * (quantity) -> N(0, Z_inf (1 - Z_inf) * matrix),
// so `matrix` carries everything except the random synchronization factor.
struct CovarianceSpec {
    double rate_exponent = 0.0;
    MatrixXd matrix;
    std::string provenance;
    double min_eigenvalue = 0.0;
};

namespace detail {

inline cx guarded_div(cx num, cx den, const char* factor) {
    if (std::abs(den) < 1e-10)
        throw Error(ErrorCode::DenominatorNearZero, std::string(factor) + " = " +
                                                        std::to_string(den.real()) + "+" +
                                                        std::to_string(den.imag()) + "i");
    return num / den;
}

inline CovarianceSpec finalize(double rate, const MatrixXcd& m, std::string provenance) {
    CovarianceSpec out;
    out.rate_exponent = rate;
    out.matrix = symmetrize_realify(m, 1e-9);
    out.provenance = std::move(provenance);
    out.min_eigenvalue = min_symmetric_eigenvalue(out.matrix);
    return out;
}

} // namespace detail

struct SigmaTildeGamma {
    double value = 0.0;
    double lower = 0.0; // c^2 / (N (2 gamma - 1)), reached for doubly stochastic W
    double upper = 0.0; // c^2 / (2 gamma - 1)
};

/// sigma_tilde_gamma^2 = ||v_1||^2 c^2 / (N (2 gamma - 1)), with its
/// W-independent bounds.
inline SigmaTildeGamma sigma_tilde_gamma_sq(const SpectralData& spec, double c, double gamma) {
    if (!(gamma > 0.5) || gamma > 1.0)
        throw Error(ErrorCode::ExponentOutOfRange,
                    "sigma_tilde_gamma diverges as gamma -> 1/2; need gamma in (1/2,1]");
    SigmaTildeGamma s;
    double denom = spec.n * (2.0 * gamma - 1.0);
    s.value = spec.v1_norm_sq * c * c / denom;
    s.lower = c * c / denom;
    s.upper = c * c / (2.0 * gamma - 1.0);
    return s;
}

/// [S^(q)]_{j1 j2} = (q/2) v_{j1}^T v_{j2}, full N x N.
inline MatrixXcd matrix_Sq(const SpectralData& spec, double q) {
    return (q / 2.0) * spec.gram_v;
}

// Entry kernels of the nu = gamma family in unified indicator form
// (ind = 1 exactly when gamma = 1; the gamma < 1 formulas have ind = 0).

namespace detail {

inline cx s11_entry(const SpectralData& s, double c, double ind, int j1, int j2) {
    if (j1 == 1 || j2 == 1) return cx(0.0, 0.0);
    cx den = c * (s.alphas[j1 - 1] + s.alphas[j2 - 1]) - ind;
    return guarded_div(cx(c * c, 0.0), den, "c(alpha_j1+alpha_j2)-ind") * s.vv(j1 - 1, j2 - 1);
}

inline cx s12_entry(const SpectralData& s, double c, double q, double ind, int j1, int j2) {
    if (j1 == 1) return cx(0.0, 0.0);
    cx a1 = s.alphas[j1 - 1];
    if (j2 == 1) {
        cx den = c * a1 + q - ind;
        return guarded_div(cx(c * (q - c), 0.0), den, "c*alpha_j1+q-ind") * s.vv(j1 - 1, 0);
    }
    cx a2 = s.alphas[j2 - 1];
    cx den = (c * a1 + c * a2 - ind) * (c * a1 + q - ind);
    return guarded_div(c * q * (c * a1 + c - ind), den,
                       "(c(alpha_j1+alpha_j2)-ind)(c*alpha_j1+q-ind)") *
           s.vv(j1 - 1, j2 - 1);
}

inline cx s22_entry(const SpectralData& s, double c, double q, double ind, int j1, int j2) {
    if (j1 == 1 && j2 == 1) {
        cx den(2.0 * q - ind, 0.0);
        return guarded_div(cx((q - c) * (q - c), 0.0), den, "2q-ind") * s.vv(0, 0);
    }
    if (j1 == 1 || j2 == 1) {
        int j = (j1 == 1) ? j2 : j1;
        cx a = s.alphas[j - 1];
        cx den = (c * a + q - ind) * (2.0 * q - ind);
        return guarded_div(cx(q * (q - c) * (c + q - ind), 0.0), den,
                           "(c*alpha_j+q-ind)(2q-ind)") *
               s.vv(j - 1, 0);
    }
    cx a1 = s.alphas[j1 - 1], a2 = s.alphas[j2 - 1];
    cx den = (2.0 * q - ind) * (c * (a1 + a2) - ind) * (c * a1 + q - ind) * (c * a2 + q - ind);
    cx num = c * c * c * (a1 + a2) + 2.0 * c * c * q * (a1 * a2 + 1.0) -
             ind * c * c * (a1 * a2 + a1 + a2 + 2.0) + c * (q - ind) * (q - ind) * (a1 + a2) -
             ind * (2.0 * c + q - 1.0) * (q - 1.0);
    return guarded_div(q * q * num, den, "(2q-ind)(c(a1+a2)-ind)(c*a1+q-ind)(c*a2+q-ind)") *
           s.vv(j1 - 1, j2 - 1);
}

inline cx s_nu_gt_gamma_entry(const SpectralData& s, double c, double q, double gamma,
                              double ind, int j1, int j2) {
    (void)c;
    if (j1 == 1 || j2 == 1) return cx(0.0, 0.0);
    cx a1 = s.alphas[j1 - 1], a2 = s.alphas[j2 - 1];
    cx l1 = s.eigenvalues[j1 - 1], l2 = s.eigenvalues[j2 - 1];
    cx t1 = guarded_div(l1 * l2 / (a1 * a2), cx(2.0 * q - ind * (2.0 * gamma - 1.0), 0.0),
                        "2q-ind(2gamma-1)");
    cx t2 = guarded_div(l1 / a1 + l2 / a2, cx(2.0 * q - ind * gamma, 0.0), "2q-ind*gamma");
    cx t3 = guarded_div(cx(1.0, 0.0), cx(2.0 * q - ind, 0.0), "2q-ind");
    return q * q * (t1 + t2 + t3) * s.vv(j1 - 1, j2 - 1);
}

} // namespace detail

struct CaseDBlocks {
    MatrixXcd s11, s12, s21, s22;
};

/// The four N x N blocks of the nu = gamma joint covariance (gamma_is_1
/// selects the indicator); gamma_is_1 = true is the joint-CLT case (d).
inline CaseDBlocks matrices_case_d(const SpectralData& spec, double c, double q,
                                   bool gamma_is_1) {
    double ind = gamma_is_1 ? 1.0 : 0.0;
    const int n = spec.n;
    CaseDBlocks b;
    b.s11.setZero(n, n);
    b.s12.setZero(n, n);
    b.s22.setZero(n, n);
    for (int j1 = 1; j1 <= n; ++j1) {
        for (int j2 = 1; j2 <= n; ++j2) {
            b.s11(j1 - 1, j2 - 1) = detail::s11_entry(spec, c, ind, j1, j2);
            b.s12(j1 - 1, j2 - 1) = detail::s12_entry(spec, c, q, ind, j1, j2);
            b.s22(j1 - 1, j2 - 1) = detail::s22_entry(spec, c, q, ind, j1, j2);
        }
    }
    b.s21 = b.s12.transpose();
    return b;
}

/// S_gamma^22 for the nu = gamma CLT of N'; index-1 row and column stay zero
/// (the first column of U_{-1} is zero, so they never enter).
inline MatrixXcd matrix_S_gamma22(const SpectralData& spec, double c, double q,
                                  bool gamma_is_1) {
    double ind = gamma_is_1 ? 1.0 : 0.0;
    const int n = spec.n;
    MatrixXcd s = MatrixXcd::Zero(n, n);
    for (int j1 = 2; j1 <= n; ++j1)
        for (int j2 = 2; j2 <= n; ++j2)
            s(j1 - 1, j2 - 1) = detail::s22_entry(spec, c, q, ind, j1, j2);
    return s;
}

/// S for the gamma < nu CLT of N'; same zero convention on index 1.
inline MatrixXcd matrix_S_nu_gt_gamma(const SpectralData& spec, double c, double q,
                                      double gamma, bool nu_is_1) {
    double ind = nu_is_1 ? 1.0 : 0.0;
    const int n = spec.n;
    MatrixXcd s = MatrixXcd::Zero(n, n);
    for (int j1 = 2; j1 <= n; ++j1)
        for (int j2 = 2; j2 <= n; ++j2)
            s(j1 - 1, j2 - 1) = detail::s_nu_gt_gamma_entry(spec, c, q, gamma, ind, j1, j2);
    return s;
}

namespace detail {

// sigma_tilde^2: the d^{1(2),1(2)} limit scaled by ||v_1||^2 / N. Defined in
// the cases where it enters the N-tilde covariance (nu < gamma0 or nu =
// gamma0 or nu = 1).
inline double sigma_tilde_sq(const SpectralData& spec, double c, double q, double gamma,
                             double nu) {
    double gamma0 = std::max(0.5, 2.0 * gamma - 1.0);
    double scale = spec.v1_norm_sq / spec.n;
    if (nu < gamma0 || (nu == gamma0 && gamma0 < 1.0)) return scale * q / 2.0;
    if (nu == 1.0 && gamma0 == 1.0) return scale * (q - c) * (q - c) / (2.0 * q - 1.0);
    if (nu == 1.0 && gamma0 < 1.0) return scale * c * c / (2.0 * q - (2.0 * gamma - 1.0));
    throw Error(ErrorCode::ExponentOutOfRange,
                "sigma_tilde^2 is not defined for gamma0 < nu < 1");
}

} // namespace detail

/// Joint 2N x 2N covariance of (Z_n, N_n), cases (a)-(e).
inline CovarianceSpec covariance_Y(const Regime& regime, const SpectralData& spec, double c,
                                   double q, double gamma, double nu) {
    (void)nu;
    const int n = spec.n;
    MatrixXcd big = MatrixXcd::Zero(2 * n, 2 * n);
    auto add_sigma_tilde = [&]() {
        double s = sigma_tilde_gamma_sq(spec, c, gamma).value;
        big += MatrixXcd::Constant(2 * n, 2 * n, cx(s, 0.0));
    };
    switch (regime.caseY) {
        case 'a': {
            MatrixXcd m22 = spec.U * matrix_Sq(spec, q) * spec.U.transpose();
            big.block(n, n, n, n) = m22;
            break;
        }
        case 'b':
            add_sigma_tilde();
            break;
        case 'c': {
            add_sigma_tilde();
            big.block(n, n, n, n) += spec.U * matrix_Sq(spec, q) * spec.U.transpose();
            break;
        }
        case 'd': {
            add_sigma_tilde();
            CaseDBlocks b = matrices_case_d(spec, c, q, true);
            big.block(0, 0, n, n) += spec.U * b.s11 * spec.U.transpose();
            big.block(0, n, n, n) += spec.U * b.s12 * spec.U.transpose();
            big.block(n, 0, n, n) += spec.U * b.s21 * spec.U.transpose();
            big.block(n, n, n, n) += spec.U * b.s22 * spec.U.transpose();
            break;
        }
        case 'e': {
            add_sigma_tilde();
            double extra =
                spec.v1_norm_sq * c * c / (spec.n * (2.0 * q - (2.0 * gamma - 1.0)));
            big.block(n, n, n, n) += MatrixXcd::Constant(n, n, cx(extra, 0.0));
            break;
        }
        default:
            throw Error(ErrorCode::ExponentOutOfRange, "unknown joint CLT case");
    }
    return detail::finalize(regime.rateY, big, std::string("joint CLT case ") + regime.caseY);
}

/// Scalar covariance of N-tilde.
inline CovarianceSpec covariance_Ntilde(const Regime& regime, const SpectralData& spec,
                                        double c, double q, double gamma, double nu) {
    double var = 0.0;
    switch (regime.caseNtilde) {
        case 'a': var = detail::sigma_tilde_sq(spec, c, q, gamma, nu); break;
        case 'b': var = sigma_tilde_gamma_sq(spec, c, gamma).value; break;
        case 'c':
            var = sigma_tilde_gamma_sq(spec, c, gamma).value +
                  detail::sigma_tilde_sq(spec, c, q, gamma, nu);
            break;
        default: throw Error(ErrorCode::ExponentOutOfRange, "unknown N-tilde case");
    }
    CovarianceSpec out;
    out.rate_exponent = regime.rateNtilde;
    out.matrix = MatrixXd::Constant(1, 1, var);
    out.provenance = std::string("N-tilde case ") + regime.caseNtilde;
    out.min_eigenvalue = var;
    return out;
}

/// Case-appropriate limit matrix M for N' (S^(q), S_gamma^22 or S), full
/// N x N with the index-1 row/column as produced by the formulas.
inline MatrixXcd nprime_limit_matrix(const Regime& regime, const SpectralData& spec, double c,
                                     double q, double gamma, double nu) {
    switch (regime.caseNprime) {
        case 'a': return matrix_Sq(spec, q);
        case 'b': return matrix_S_gamma22(spec, c, q, gamma == 1.0);
        case 'c': return matrix_S_nu_gt_gamma(spec, c, q, gamma, nu == 1.0);
        default: throw Error(ErrorCode::ExponentOutOfRange, "unknown N' case");
    }
}

/// N x N covariance of N' = (I - u_1 v_1^T) N_n: U_{-1} M U_{-1}^T.
inline CovarianceSpec covariance_Nprime(const Regime& regime, const SpectralData& spec,
                                        double c, double q, double gamma, double nu) {
    MatrixXcd m = nprime_limit_matrix(regime, spec, c, q, gamma, nu);
    MatrixXcd u_minus_1 = spec.U;
    u_minus_1.col(0).setZero();
    MatrixXcd cov = u_minus_1 * m * u_minus_1.transpose();
    return detail::finalize(regime.rateNprime, cov,
                            std::string("N-prime case ") + regime.caseNprime);
}

// ----------------------------------------------------------------------------
// Mean-field closed forms: W = (alpha/N) 1 1^T + (1 - alpha) I has
// lambda_j = 1 - alpha for j >= 2 and an orthonormal eigenbasis, so every
// limit matrix on indices 2..N collapses to a scalar times the identity.

inline double mf_s_q(double q) { return q / 2.0; }

inline double mf_s22_gamma(double alpha, double c, double q, bool gamma_is_1) {
    double ind = gamma_is_1 ? 1.0 : 0.0;
    double den = (2.0 * q - ind) * (2.0 * c * alpha - ind) * (c * alpha + q - ind) *
                 (c * alpha + q - ind);
    if (std::abs(den) < 1e-10)
        throw Error(ErrorCode::DenominatorNearZero, "mean-field s22_gamma denominator");
    double num = c * c * (alpha * alpha + 1.0) * (2.0 * q - ind) +
                 2.0 * c * c * alpha * (c - ind) - ind * c * c +
                 2.0 * alpha * c * (q - ind) * (q - ind) -
                 ind * (2.0 * c + q - 1.0) * (q - 1.0);
    return q * q * num / den;
}

inline double mf_s_nu_gt_gamma(double alpha, double c, double q, double gamma, bool nu_is_1) {
    (void)c;
    double ind = nu_is_1 ? 1.0 : 0.0;
    double rho = (1.0 - alpha) / alpha;
    double d1 = 2.0 * q - ind * (2.0 * gamma - 1.0);
    double d2 = 2.0 * q - ind * gamma;
    double d3 = 2.0 * q - ind;
    if (std::abs(d1) < 1e-10 || std::abs(d2) < 1e-10 || std::abs(d3) < 1e-10)
        throw Error(ErrorCode::DenominatorNearZero, "mean-field s denominator");
    return q * q * (rho * rho / d1 + 2.0 * rho / d2 + 1.0 / d3);
}

/// s* such that n^{nu/2} N' -> N(0, Z(1-Z) s* (I - 11^T/N)) for mean-field W.
inline double mf_s_star(const Regime& regime, double alpha, double c, double q) {
    switch (regime.caseNprime) {
        case 'a': return mf_s_q(q);
        case 'b': return mf_s22_gamma(alpha, c, q, regime.gamma == 1.0);
        case 'c': return mf_s_nu_gt_gamma(alpha, c, q, regime.gamma, regime.nu == 1.0);
        default: throw Error(ErrorCode::ExponentOutOfRange, "unknown N' case");
    }
}

} // namespace rsp
