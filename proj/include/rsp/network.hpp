#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsp/detail/eigenbasis.hpp"
#include "rsp/errors.hpp"
#include "rsp/linalg.hpp"

namespace rsp {

// Column-stochastic nonnegative interaction matrix. weights(h, j) is the
// influence of vertex h on vertex j; each column sums to one.
struct WeightedNetwork {
    int n_agents = 0;
    MatrixXd weights;
};

namespace detail {

// Reachability over the positivity pattern, following edges h -> j when
// weights(h, j) > 0 (exact comparison: weights are inputs, not measurements).
inline std::vector<bool> reachable_from(const MatrixXd& w, int start, bool reversed) {
    const int n = static_cast<int>(w.rows());
    std::vector<bool> seen(n, false);
    std::vector<int> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        int h = stack.back();
        stack.pop_back();
        for (int j = 0; j < n; ++j) {
            double e = reversed ? w(j, h) : w(h, j);
            if (e > 0.0 && !seen[j]) {
                seen[j] = true;
                stack.push_back(j);
            }
        }
    }
    return seen;
}

} // namespace detail

inline constexpr double kColumnSumTol = 1e-12;
inline constexpr double kDiagonalizableCondCap = 1e8;

/// Validate a raw matrix against the model requirements, in order:
/// nonnegativity, column normalization, irreducibility, diagonalizability.
inline WeightedNetwork validate_network(const MatrixXd& raw) {
    if (raw.rows() != raw.cols() || raw.rows() < 1)
        throw Error(ErrorCode::DimensionMismatch,
                    "expected a square matrix with N >= 1, got " +
                        std::to_string(raw.rows()) + "x" + std::to_string(raw.cols()));
    const int n = static_cast<int>(raw.rows());

    for (int j = 0; j < n; ++j)
        for (int h = 0; h < n; ++h)
            if (raw(h, j) < 0.0)
                throw Error(ErrorCode::NegativeEntry,
                            "entry (" + std::to_string(h) + "," + std::to_string(j) +
                                ") = " + std::to_string(raw(h, j)));

    for (int j = 0; j < n; ++j) {
        double s = raw.col(j).sum();
        if (std::abs(s - 1.0) > kColumnSumTol)
            throw Error(ErrorCode::ColumnNotStochastic,
                        "column " + std::to_string(j) + " sums to " + std::to_string(s));
    }

    // Strong connectivity: every vertex reachable from 0 along edges and
    // along reversed edges.
    auto fwd = detail::reachable_from(raw, 0, false);
    auto bwd = detail::reachable_from(raw, 0, true);
    for (int v = 0; v < n; ++v) {
        if (!fwd[v])
            throw Error(ErrorCode::Reducible,
                        "no path from vertex 0 to vertex " + std::to_string(v));
        if (!bwd[v])
            throw Error(ErrorCode::Reducible,
                        "no path from vertex " + std::to_string(v) + " to vertex 0");
    }

    double cond = detail::left_eigenbasis(raw).cond;
    if (!(cond < kDiagonalizableCondCap))
        throw Error(ErrorCode::NotDiagonalizable,
                    "eigenvector matrix condition estimate " + std::to_string(cond));

    return WeightedNetwork{n, raw};
}

/// Mean-field interaction: w = alpha/N + (1-alpha) on the diagonal.
/// Doubly stochastic and symmetric; irreducible exactly when alpha > 0.
inline WeightedNetwork mean_field(int n, double alpha) {
    if (n < 2)
        throw Error(ErrorCode::DimensionMismatch, "mean_field needs N >= 2");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw Error(ErrorCode::AlphaOutOfRange,
                    "alpha must lie in (0,1], got " + std::to_string(alpha));
    MatrixXd w = MatrixXd::Constant(n, n, alpha / n);
    w.diagonal().array() += 1.0 - alpha;
    return WeightedNetwork{n, w};
}

} // namespace rsp
