#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsp/detail/eigenbasis.hpp"
#include "rsp/errors.hpp"
#include "rsp/linalg.hpp"
#include "rsp/network.hpp"

namespace rsp {

// Biorthogonal eigensystem of W. Column j of U is the left eigenvector u_j
// (u_j^T W = lambda_j u_j^T, unit norm) and column j of V the right
// eigenvector v_j, with the plain-transpose pairing u_h^T v_j = delta_hj.
// lambda[0] = 1 with u_1 = N^{-1/2} 1; the rest are ordered by descending
// real part, then descending imaginary part.
struct SpectralData {
    int n = 0;
    VectorXcd eigenvalues;
    MatrixXcd U;
    MatrixXcd V;
    VectorXcd alphas;          // alpha_j = 1 - lambda_j (entry 0 is zero)
    cx lambda_star{};          // max-real-part eigenvalue among j >= 2
    double a_star = 0.0;       // Re(1 - lambda_star)
    std::vector<int> partner;  // conjugate partner index; partner[j] == j if real
    MatrixXcd gram_v;          // gram_v(i, j) = v_i^T v_j (plain transpose)
    double v1_norm_sq = 0.0;
    double cond_U = 0.0;

    cx vv(int j1, int j2) const { return gram_v(j1, j2); }
};

inline constexpr double kSpectralResidualTol = 1e-10;

inline SpectralData spectral_decompose(const WeightedNetwork& net) {
    const int n = net.n_agents;
    const MatrixXd& w = net.weights;

    detail::EigenBasis basis = detail::left_eigenbasis(w);
    if (!(basis.cond < kDiagonalizableCondCap))
        throw Error(ErrorCode::NotDiagonalizable,
                    "eigenvector matrix condition estimate " + std::to_string(basis.cond));

    // Locate the Perron eigenvalue and snap it to its exact value.
    int perron = 0;
    double best = std::numeric_limits<double>::max();
    for (int j = 0; j < n; ++j) {
        double d = std::abs(basis.lambda[j] - cx(1.0, 0.0));
        if (d < best) {
            best = d;
            perron = j;
        }
    }
    if (best > 1e-8)
        throw Error(ErrorCode::EigensolverFailure,
                    "no eigenvalue near 1 (closest at distance " + std::to_string(best) + ")");
    VectorXcd perron_u = VectorXcd::Constant(n, cx(1.0 / std::sqrt(double(n)), 0.0));
    if ((basis.U.col(perron) - perron_u).cwiseAbs().maxCoeff() > 1e-6)
        throw Error(ErrorCode::EigensolverFailure, "Perron left eigenvector is not uniform");
    basis.lambda[perron] = cx(1.0, 0.0);
    basis.U.col(perron) = perron_u;

    std::vector<int> order;
    order.reserve(n);
    order.push_back(perron);
    std::vector<int> rest;
    for (int j = 0; j < n; ++j)
        if (j != perron) rest.push_back(j);
    std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) {
        if (basis.lambda[a].real() != basis.lambda[b].real())
            return basis.lambda[a].real() > basis.lambda[b].real();
        return basis.lambda[a].imag() > basis.lambda[b].imag();
    });
    order.insert(order.end(), rest.begin(), rest.end());

    SpectralData spec;
    spec.n = n;
    spec.eigenvalues.resize(n);
    spec.U.resize(n, n);
    for (int j = 0; j < n; ++j) {
        spec.eigenvalues[j] = basis.lambda[order[j]];
        spec.U.col(j) = basis.U.col(order[j]);
    }

    // Conjugate partner links; pairs are made bit-exact mirrors.
    spec.partner.assign(n, -1);
    spec.partner[0] = 0;
    for (int j = 1; j < n; ++j) {
        if (spec.partner[j] >= 0) continue;
        if (std::abs(spec.eigenvalues[j].imag()) <= 1e-12) {
            spec.partner[j] = j;
            continue;
        }
        int match = -1;
        double dmin = std::numeric_limits<double>::max();
        for (int k = j + 1; k < n; ++k) {
            if (spec.partner[k] >= 0) continue;
            double d = std::abs(spec.eigenvalues[k] - std::conj(spec.eigenvalues[j]));
            if (d < dmin) {
                dmin = d;
                match = k;
            }
        }
        if (match < 0 || dmin > detail::kClusterTol)
            throw Error(ErrorCode::EigensolverFailure,
                        "unpaired complex eigenvalue at index " + std::to_string(j));
        spec.eigenvalues[match] = std::conj(spec.eigenvalues[j]);
        spec.U.col(match) = spec.U.col(j).conjugate();
        spec.partner[j] = match;
        spec.partner[match] = j;
    }

    // Right eigenvectors as the inverse transpose, with one refinement pass.
    MatrixXcd ut = spec.U.transpose();
    Eigen::PartialPivLU<MatrixXcd> lu(ut);
    spec.V = lu.solve(MatrixXcd::Identity(n, n));
    spec.V = spec.V * (2.0 * MatrixXcd::Identity(n, n) - ut * spec.V);

    double bio = (ut * spec.V - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (bio > kSpectralResidualTol)
        throw Error(ErrorCode::EigensolverFailure,
                    "biorthogonality residual " + std::to_string(bio));
    double resid =
        (w.transpose() * spec.U - spec.U * spec.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff();
    if (resid > kSpectralResidualTol)
        throw Error(ErrorCode::EigensolverFailure,
                    "eigenvector residual " + std::to_string(resid));

    for (int i = 0; i < n; ++i) {
        if (!(spec.V(i, 0).real() > 0.0) || std::abs(spec.V(i, 0).imag()) > kSpectralResidualTol)
            throw Error(ErrorCode::EigensolverFailure,
                        "v_1 entry " + std::to_string(i) + " is not strictly positive");
    }

    spec.alphas = VectorXcd::Zero(n);
    for (int j = 1; j < n; ++j) spec.alphas[j] = cx(1.0, 0.0) - spec.eigenvalues[j];
    if (n >= 2) {
        spec.lambda_star = spec.eigenvalues[1];
        spec.a_star = 1.0 - spec.lambda_star.real();
    } else {
        spec.lambda_star = cx(std::numeric_limits<double>::quiet_NaN(), 0.0);
        spec.a_star = std::numeric_limits<double>::infinity();
    }
    spec.gram_v = spec.V.transpose() * spec.V;
    spec.v1_norm_sq = spec.V.col(0).squaredNorm();
    spec.cond_U = basis.cond;
    return spec;
}

// CLT admissibility flags: the (gamma, c) condition when gamma = 1,
// q > 1/2 when nu = 1, and the q != c*alpha_j warning when nu = gamma.
struct AssumptionReport {
    bool pass = true;
    std::vector<std::string> failures;
    std::vector<std::string> warnings;
};

inline AssumptionReport check_clt_assumptions(const SpectralData& spec, double gamma, double c,
                                              double nu, double q) {
    AssumptionReport rep;
    auto fail = [&](const std::string& m) {
        rep.pass = false;
        rep.failures.push_back(m);
    };
    if (!(gamma > 0.5) || gamma > 1.0) fail("gamma must lie in (1/2,1]");
    if (!(nu > 0.5) || nu > 1.0) fail("nu must lie in (1/2,1]");
    if (!(c > 0.0)) fail("c must be positive");
    if (!(q > 0.0)) fail("q must be positive");
    if (!rep.pass) return rep;

    if (gamma == 1.0 && spec.n >= 2) {
        if (!(spec.lambda_star.real() < 1.0 - 1.0 / (2.0 * c)))
            fail("gamma = 1 requires Re(lambda*) < 1 - 1/(2c); have Re(lambda*) = " +
                 std::to_string(spec.lambda_star.real()) + ", c = " + std::to_string(c));
    }
    if (nu == 1.0 && !(q > 0.5)) fail("nu = 1 requires q > 1/2");
    if (nu == gamma) {
        for (int j = 1; j < spec.n; ++j) {
            if (std::abs(cx(q, 0.0) - c * spec.alphas[j]) <= 1e-9 * (1.0 + q))
                rep.warnings.push_back(
                    "q = c*alpha_j at j = " + std::to_string(j + 1) +
                    "; covariance formulas are evaluated on a best-effort basis");
        }
    }
    return rep;
}

} // namespace rsp
