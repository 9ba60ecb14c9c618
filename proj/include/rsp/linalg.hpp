#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "rsp/errors.hpp"

namespace rsp {

using cx = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using MatrixXd = Eigen::MatrixXd;
using VectorXcd = Eigen::VectorXcd;
using VectorXd = Eigen::VectorXd;

/// Hermitian-symmetrize (A + A^H)/2, assert the imaginary residual is below
/// tol, and return the real part.
inline MatrixXd symmetrize_realify(const MatrixXcd& a, double tol = 1e-9) {
    MatrixXcd h = 0.5 * (a + a.adjoint());
    double im = h.imag().cwiseAbs().maxCoeff();
    if (im > tol)
        throw Error(ErrorCode::EigensolverFailure,
                    "imaginary residual " + std::to_string(im) + " above " + std::to_string(tol));
    return h.real();
}

/// Smallest eigenvalue of a real symmetric matrix (PSD check helper).
inline double min_symmetric_eigenvalue(const MatrixXd& s) {
    if (s.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Inverse symmetric square root of a real SPD matrix. Throws
/// SingularWhitening when the spectrum is not safely positive.
inline MatrixXd sym_inv_sqrt(const MatrixXd& s, double rel_tol = 1e-12) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
    const VectorXd& ev = es.eigenvalues();
    double emax = ev.cwiseAbs().maxCoeff();
    if (emax <= 0.0 || ev.minCoeff() <= rel_tol * emax)
        throw Error(ErrorCode::SingularWhitening,
                    "matrix not positive definite (min eigenvalue " +
                        std::to_string(ev.minCoeff()) + ")");
    VectorXd d = ev.array().rsqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

// Change of coordinates that turns a conjugate-closed set of complex spectral
// coordinates into real ones. Entry kinds refer to the eigenvalue list:
// a real eigenvalue keeps its coordinate, a conjugate pair (j, jbar) maps to
// (sqrt2*Re, sqrt2*Im) of the j-coordinate. The transform Q acts by plain
// (non-conjugating) congruence, so a plain-transpose second-moment matrix M
// maps to the genuine real covariance Q M Q^T.
struct PairBasis {
    struct Entry {
        int index;          // index into the spectral coordinate vector
        int partner;        // == index for real eigenvalues
        bool is_pair_first; // true for the +Im member of a pair
    };
    std::vector<Entry> entries; // one per retained real coordinate
    int dim = 0;                // size of the coordinate vector

    // Build from eigenvalue partner links: partner[j] == j for real ones.
    static PairBasis build(const std::vector<int>& partner) {
        PairBasis b;
        b.dim = static_cast<int>(partner.size());
        std::vector<bool> used(partner.size(), false);
        for (int j = 0; j < b.dim; ++j) {
            if (used[j]) continue;
            int p = partner[j];
            if (p == j) {
                b.entries.push_back({j, j, false});
                used[j] = true;
            } else {
                b.entries.push_back({j, p, true});  // Re coordinate
                b.entries.push_back({j, p, false}); // Im coordinate
                used[j] = used[p] = true;
            }
        }
        return b;
    }

    VectorXd realify_vector(const VectorXcd& xi, double tol = 1e-8) const {
        static const double sqrt2 = std::sqrt(2.0);
        VectorXd out(entries.size());
        for (std::size_t r = 0; r < entries.size(); ++r) {
            const Entry& e = entries[r];
            if (e.partner == e.index) {
                if (std::abs(xi[e.index].imag()) > tol * (1.0 + std::abs(xi[e.index])))
                    throw Error(ErrorCode::EigensolverFailure,
                                "nonreal coordinate on a real eigendirection");
                out[r] = xi[e.index].real();
            } else {
                out[r] = e.is_pair_first ? sqrt2 * xi[e.index].real()
                                         : sqrt2 * xi[e.index].imag();
            }
        }
        return out;
    }

    // Q rows as complex row vectors over the coordinate indices.
    MatrixXcd q_matrix() const {
        static const double s = 1.0 / std::sqrt(2.0);
        MatrixXcd q = MatrixXcd::Zero(static_cast<int>(entries.size()), dim);
        for (std::size_t r = 0; r < entries.size(); ++r) {
            const Entry& e = entries[r];
            if (e.partner == e.index) {
                q(static_cast<int>(r), e.index) = 1.0;
            } else if (e.is_pair_first) {
                q(static_cast<int>(r), e.index) = s;
                q(static_cast<int>(r), e.partner) = s;
            } else {
                q(static_cast<int>(r), e.index) = cx(0.0, -s);
                q(static_cast<int>(r), e.partner) = cx(0.0, s);
            }
        }
        return q;
    }

    // Real covariance of the realified coordinates from the plain-transpose
    // second-moment matrix of the complex ones.
    MatrixXd realify_matrix(const MatrixXcd& m, double tol = 1e-8) const {
        MatrixXcd q = q_matrix();
        MatrixXcd out = q * m * q.transpose();
        double im = out.imag().cwiseAbs().maxCoeff();
        double scale = out.cwiseAbs().maxCoeff();
        if (im > tol * (1.0 + scale))
            throw Error(ErrorCode::EigensolverFailure,
                        "pair realification left imaginary residual " + std::to_string(im));
        return 0.5 * (out.real() + out.real().transpose());
    }
};

} // namespace rsp
