#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rsp/errors.hpp"
#include "rsp/linalg.hpp"

namespace rsp::detail {

// Unit-norm left eigenbasis of W, before any ordering. Columns of U are the
// left eigenvectors u_j (right eigenvectors of W^T). Within a repeated
// eigenvalue the vectors are orthonormalized; each column's largest-modulus
// entry is rotated onto the positive real axis so the basis is deterministic.
struct EigenBasis {
    VectorXcd lambda;
    MatrixXcd U;
    double cond = 0.0;
};

inline constexpr double kClusterTol = 1e-8;

inline std::vector<std::vector<int>> cluster_eigenvalues(const VectorXcd& lambda) {
    const int n = static_cast<int>(lambda.size());
    std::vector<int> group(n, -1);
    std::vector<std::vector<int>> clusters;
    for (int i = 0; i < n; ++i) {
        if (group[i] >= 0) continue;
        group[i] = static_cast<int>(clusters.size());
        clusters.push_back({i});
        for (int j = i + 1; j < n; ++j) {
            if (group[j] < 0 && std::abs(lambda[i] - lambda[j]) <= kClusterTol) {
                group[j] = group[i];
                clusters.back().push_back(j);
            }
        }
    }
    return clusters;
}

inline void phase_fix_column(MatrixXcd& u, int col) {
    int kmax = 0;
    double best = -1.0;
    for (int k = 0; k < u.rows(); ++k) {
        double m = std::abs(u(k, col));
        if (m > best + 1e-15) {
            best = m;
            kmax = k;
        }
    }
    cx pivot = u(kmax, col);
    if (std::abs(pivot) > 0.0) u.col(col) *= std::conj(pivot) / std::abs(pivot);
}

inline void orthonormalize_cluster(MatrixXcd& u, const std::vector<int>& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            cx proj = u.col(idx[k]).adjoint() * u.col(idx[i]);
            u.col(idx[i]) -= proj * u.col(idx[k]);
        }
        double nrm = u.col(idx[i]).norm();
        if (nrm < 1e-12)
            throw Error(ErrorCode::EigensolverFailure,
                        "degenerate eigenspace basis (vanishing norm)");
        u.col(idx[i]) /= nrm;
        phase_fix_column(u, idx[i]);
    }
}

inline EigenBasis left_eigenbasis(const MatrixXd& w) {
    Eigen::EigenSolver<MatrixXd> es(w.transpose());
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::EigensolverFailure, "eigensolver did not converge");

    EigenBasis basis;
    basis.lambda = es.eigenvalues();
    basis.U = es.eigenvectors();

    auto clusters = cluster_eigenvalues(basis.lambda);
    std::vector<bool> handled(clusters.size(), false);
    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
        if (handled[ci]) continue;
        cx center = basis.lambda[clusters[ci][0]];
        if (center.imag() < -kClusterTol) continue; // mirrored by its conjugate cluster
        orthonormalize_cluster(basis.U, clusters[ci]);
        handled[ci] = true;
        if (center.imag() > kClusterTol) {
            // Mirror the conjugate cluster so pairs stay exact conjugates.
            for (std::size_t cj = 0; cj < clusters.size(); ++cj) {
                if (handled[cj]) continue;
                if (std::abs(basis.lambda[clusters[cj][0]] - std::conj(center)) <= kClusterTol &&
                    clusters[cj].size() == clusters[ci].size()) {
                    for (std::size_t k = 0; k < clusters[ci].size(); ++k) {
                        int src = clusters[ci][k];
                        int dst = clusters[cj][k];
                        basis.lambda[dst] = std::conj(basis.lambda[src]);
                        basis.U.col(dst) = basis.U.col(src).conjugate();
                    }
                    handled[cj] = true;
                    break;
                }
            }
        }
    }

    Eigen::JacobiSVD<MatrixXcd> svd(basis.U);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    basis.cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    return basis;
}

} // namespace rsp::detail
