#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "rsp/errors.hpp"
#include "rsp/linalg.hpp"
#include "rsp/spectral.hpp"

namespace rsp::numerics {

// Deterministic sequences from the proofs, evaluated numerically as
// independent oracles for the covariance formulas. Everything is computed in
// log space: products p and ratios F become prefix sums of complex logs.

struct ProductParams {
    long m0 = 2;
    double delta = 1.0;
    cx x{1.0, 0.0};
};

// Smallest m0 >= 2 with Re(x) * m0^-delta < 0.9. A margin below the bare
// admissibility bound (< 1) keeps the log factors well conditioned.
inline long auto_m0(double delta, double re_x) {
    if (!(re_x > 0.0))
        throw Error(ErrorCode::ExponentOutOfRange, "need Re(x) > 0");
    long m0 = 2;
    while (re_x * std::pow(double(m0), -delta) >= 0.9) ++m0;
    return m0;
}

inline ProductParams make_product_params(double delta, cx x) {
    if (!(delta > 0.5) || delta > 1.0)
        throw Error(ErrorCode::ExponentOutOfRange, "delta must lie in (1/2,1]");
    return ProductParams{auto_m0(delta, x.real()), delta, x};
}

// Prefix log-products: logs[k - (m0-1)] = log p_k(x) for k = m0-1 .. n,
// with p_{m0-1} = 1 (empty product).
struct PrefixLogs {
    long m0 = 2;
    std::vector<cx> logs;

    cx log_p(long k) const { return logs[static_cast<std::size_t>(k - m0 + 1)]; }
    // log F_{k+1,n} = log p_n - log p_k, valid for m0-1 <= k <= n.
    cx log_F(long k_plus_1, long n) const { return log_p(n) - log_p(k_plus_1 - 1); }
};

inline PrefixLogs prefix_logs(long n, double delta, cx x, long m0) {
    PrefixLogs pl;
    pl.m0 = m0;
    pl.logs.resize(static_cast<std::size_t>(n - m0 + 2));
    pl.logs[0] = cx(0.0, 0.0);
    cx acc(0.0, 0.0);
    for (long m = m0; m <= n; ++m) {
        acc += std::log(cx(1.0, 0.0) - x * std::pow(double(m), -delta));
        pl.logs[static_cast<std::size_t>(m - m0 + 1)] = acc;
    }
    return pl;
}

/// p^delta_n(x) = prod_{m=m0}^n (1 - x/m^delta).
inline cx p_delta(long n, const ProductParams& p) {
    if (n < p.m0) return cx(1.0, 0.0);
    return std::exp(prefix_logs(n, p.delta, p.x, p.m0).log_p(n));
}

/// F^delta_{k+1,n}(x) = p_n(x) / p_k(x); equals 1 when k = n.
inline cx F_delta(long k_plus_1, long n, const ProductParams& p) {
    long k = k_plus_1 - 1;
    if (k < p.m0 - 1 || k > n)
        throw Error(ErrorCode::ExponentOutOfRange, "F_delta needs m0 <= k+1 <= n+1");
    if (k == n) return cx(1.0, 0.0);
    return std::exp(prefix_logs(n, p.delta, p.x, p.m0).log_F(k_plus_1, n));
}

// h_l(1 - x/c) in the G-sum, which collapses to x*l^-gamma when nu < gamma
// and to q*l^-nu when nu >= gamma (zero for x = 0).
inline cx g_sum_h(long l, cx x, double q, double gamma, double nu) {
    if (nu < gamma) return x * std::pow(double(l), -gamma);
    if (x == cx(0.0, 0.0)) return cx(0.0, 0.0);
    return cx(q * std::pow(double(l), -nu), 0.0);
}

/// Direct evaluation of G_{k+1,n-1}(x, q) =
///   sum_l F^gamma_{l+1,n-1}(x) h_l(1-x/c) F^nu_{k+1,l-1}(q).
inline cx G_sum(long k_plus_1, long n_minus_1, cx x, double q, double gamma, double nu) {
    if (x == cx(0.0, 0.0)) return cx(0.0, 0.0); // h_l(1) = 0: every summand vanishes
    long k = k_plus_1 - 1;
    long m0 = std::max(auto_m0(gamma, x.real()), auto_m0(nu, q));
    if (k < m0)
        throw Error(ErrorCode::ExponentOutOfRange, "G_sum needs k >= m0 = " + std::to_string(m0));
    PrefixLogs lg = prefix_logs(n_minus_1, gamma, x, m0);
    PrefixLogs lq = prefix_logs(n_minus_1, nu, cx(q, 0.0), m0);
    cx total(0.0, 0.0);
    for (long l = k + 1; l <= n_minus_1; ++l) {
        cx term = std::exp(lg.log_F(l + 1, n_minus_1) + lq.log_F(k + 1, l - 1)) *
                  g_sum_h(l, x, q, gamma, nu);
        total += term;
    }
    return total;
}

/// Exact identity for nu = gamma, x != q (the telescoping form); for x = q the
/// asymptotic expression with its leading term.
inline cx G_closed_nu_eq_gamma(long k_plus_1, long n_minus_1, cx x, double q, double gamma,
                               long m0) {
    PrefixLogs lg = prefix_logs(n_minus_1, gamma, x, m0);
    PrefixLogs lq = prefix_logs(n_minus_1, gamma, cx(q, 0.0), m0);
    cx Fq = std::exp(lq.log_F(k_plus_1, n_minus_1));
    if (std::abs(x - cx(q, 0.0)) > 1e-12) {
        cx Fx = std::exp(lg.log_F(k_plus_1, n_minus_1));
        return q / (x - q) * (Fq - Fx);
    }
    // Collision branch q = c*alpha_j; kept experimental.
    double lead = (gamma < 1.0)
                      ? (std::pow(double(n_minus_1), 1.0 - gamma) -
                         std::pow(double(k_plus_1), 1.0 - gamma)) /
                            (1.0 - gamma)
                      : std::log(double(n_minus_1) / double(k_plus_1));
    return q * lead * Fq;
}

// 2x2 transition blocks of the decomposition. D_{Q,j,m} acts on the
// coordinates of Y along (u_{j(1)}, u_{j(2)}).
inline Eigen::Matrix2cd D_Q(long m, cx lambda, double c, double q, double gamma, double nu) {
    double r_hat = c * std::pow(double(m), -gamma);
    double q_hat = q * std::pow(double(m), -nu);
    cx h = (nu < gamma) ? cx(r_hat, 0.0) * (cx(1.0, 0.0) - lambda)
                        : (std::abs(lambda - cx(1.0, 0.0)) < 1e-15 ? cx(0.0, 0.0)
                                                                   : cx(q_hat, 0.0));
    Eigen::Matrix2cd d;
    d << cx(r_hat, 0.0) * (cx(1.0, 0.0) - lambda), cx(0.0, 0.0), -lambda * h, cx(q_hat, 0.0);
    return d;
}

/// Brute-force product A^j_{k+1,n-1} = prod_{m=k+1}^{n-1} (I - D_{Q,j,m}),
/// multiplied left to right.
inline Eigen::Matrix2cd A_matrix_product(long k_plus_1, long n_minus_1, cx lambda, double c,
                                         double q, double gamma, double nu) {
    Eigen::Matrix2cd a = Eigen::Matrix2cd::Identity();
    for (long m = k_plus_1; m <= n_minus_1; ++m) a = a * (Eigen::Matrix2cd::Identity() - D_Q(m, lambda, c, q, gamma, nu));
    return a;
}

/// Closed form of the same product: diagonal F-ratios with the G-sum in the
/// lower-left corner (identity upper-left block for j = 1).
inline Eigen::Matrix2cd A_matrix_closed(int j_index, long k_plus_1, long n_minus_1,
                                        const SpectralData& spec, double c, double q,
                                        double gamma, double nu) {
    Eigen::Matrix2cd a = Eigen::Matrix2cd::Identity();
    long q_m0 = auto_m0(nu, q);
    if (j_index == 1) {
        ProductParams pq{q_m0, nu, cx(q, 0.0)};
        a(1, 1) = F_delta(k_plus_1, n_minus_1, pq);
        return a;
    }
    cx lambda = spec.eigenvalues[j_index - 1];
    cx x = c * spec.alphas[j_index - 1];
    long m0 = std::max(auto_m0(gamma, x.real()), q_m0);
    ProductParams px{m0, gamma, x};
    ProductParams pq{m0, nu, cx(q, 0.0)};
    a(0, 0) = F_delta(k_plus_1, n_minus_1, px);
    a(1, 1) = F_delta(k_plus_1, n_minus_1, pq);
    a(1, 0) = lambda * G_sum(k_plus_1, n_minus_1, x, q, gamma, nu);
    return a;
}

/// Numeric value of n^{beta-delta1} sum_k k^-beta F^{delta1}(x1) F^{delta2}(x2).
inline cx tail_sum_limit(double beta, double delta1, double delta2, cx x1, cx x2, long n) {
    if (delta1 > delta2)
        throw Error(ErrorCode::ExponentOutOfRange, "tail_sum_limit needs delta1 <= delta2");
    long m0 = std::max(auto_m0(delta1, x1.real()), auto_m0(delta2, x2.real()));
    PrefixLogs l1 = prefix_logs(n, delta1, x1, m0);
    PrefixLogs l2 = prefix_logs(n, delta2, x2, m0);
    cx total(0.0, 0.0);
    for (long k = m0; k <= n; ++k) {
        total += std::exp(l1.log_F(k + 1, n) + l2.log_F(k + 1, n) -
                          beta * std::log(double(k)));
    }
    return total * std::pow(double(n), beta - delta1);
}

/// The three-branch limit the sum above converges to.
inline cx tail_sum_limit_value(double beta, double delta1, double delta2, cx x1, cx x2) {
    if (delta1 == delta2 && delta1 < 1.0) return cx(1.0, 0.0) / (x1 + x2);
    if (delta1 == delta2) {
        cx den = x1 + x2 - (beta - 1.0);
        if (den.real() <= 0.0)
            throw Error(ErrorCode::DenominatorNearZero,
                        "tail-sum branch needs Re(x1+x2) > beta-1");
        return cx(1.0, 0.0) / den;
    }
    return cx(1.0, 0.0) / x1;
}

// ----------------------------------------------------------------------------
// kernel limits: the per-coordinate variance limits behind every S-matrix entry.

enum class LimitCase { i, ii, iii, iv, v, vi };

inline double t_n_squared(LimitCase c, double gamma, double nu, long n) {
    switch (c) {
        case LimitCase::i:
        case LimitCase::iii:
        case LimitCase::iv: return std::pow(double(n), gamma);
        case LimitCase::ii:
        case LimitCase::vi: return std::pow(double(n), nu);
        case LimitCase::v: return std::pow(double(n), 2.0 * gamma - nu);
    }
    return 1.0;
}

// Scaled accumulator for suffix sums of exp(log-terms) whose magnitudes span
// many orders: value = exp(shift) * acc.
struct ScaledSum {
    double shift = -std::numeric_limits<double>::infinity();
    cx acc{0.0, 0.0};

    void add_log(cx t) {
        double m = t.real();
        if (acc == cx(0.0, 0.0)) {
            shift = m;
            acc = std::exp(t - cx(m, 0.0));
            return;
        }
        if (m > shift) {
            acc = acc * std::exp(cx(shift - m, 0.0)) + std::exp(t - cx(m, 0.0));
            shift = m;
        } else {
            acc += std::exp(t - cx(shift, 0.0));
        }
    }
    // log of the current value composed with an outer log-factor.
    cx value_times_exp(cx outer_log) const {
        if (acc == cx(0.0, 0.0)) return cx(0.0, 0.0);
        return std::exp(outer_log + cx(shift, 0.0)) * acc;
    }
};

// Evaluator for t_n^2 sum_k d^{j1(i1)} d^{j2(i2)} at a fixed horizon. Kernels
// are the exact decomposition coordinates:
//   d^{j(1)}_{k,n} = r_hat_{k-1} F^gamma_{k+1,n-1}(c alpha_j)        (j >= 2)
//   d^{j(2)}_{k,n} = lambda_j r_hat_{k-1} G_{k+1,n-1}(c alpha_j, q)
//                    + (q_hat_{k,k} - r_hat_{k-1} g(lambda_j)) F^nu_{k+1,n-1}(q)
// with the j = 1 specializations. One backward pass per j builds the G suffix
// sums, so a full pair costs O(n).
class KernelLimitEvaluator {
public:
    KernelLimitEvaluator(const SpectralData& spec, double c, double q, double gamma, double nu,
                    long n)
        : spec_(spec), c_(c), q_(q), gamma_(gamma), nu_(nu), n_(n) {
        m0_ = auto_m0(nu, q);
        for (int j = 2; j <= spec.n; ++j)
            m0_ = std::max(m0_, auto_m0(gamma, (c * spec.alphas[j - 1]).real()));
        lq_ = prefix_logs(n - 1, nu_, cx(q_, 0.0), m0_);
    }

    long m0() const { return m0_; }

    // Kernel vector over k = m0 .. n-1 for coordinate (j, i).
    const std::vector<cx>& kernel(int j_index, int i_index) {
        auto key = std::make_pair(j_index, i_index);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        std::vector<cx> d(static_cast<std::size_t>(n_ - m0_), cx(0.0, 0.0));
        if (j_index == 1) {
            for (long k = m0_; k <= n_ - 1; ++k) {
                double r_hat = c_ * std::pow(double(k), -gamma_);
                if (i_index == 1) {
                    d[static_cast<std::size_t>(k - m0_)] = cx(r_hat, 0.0);
                } else {
                    double q_hat = q_ * std::pow(double(k), -nu_);
                    d[static_cast<std::size_t>(k - m0_)] =
                        cx(q_hat - r_hat, 0.0) * std::exp(lq_.log_F(k + 1, n_ - 1));
                }
            }
        } else {
            cx lambda = spec_.eigenvalues[j_index - 1];
            cx x = c_ * spec_.alphas[j_index - 1];
            PrefixLogs lg = prefix_logs(n_ - 1, gamma_, x, m0_);
            cx g = (nu_ < gamma_) ? lambda : cx(0.0, 0.0);
            if (i_index == 1) {
                for (long k = m0_; k <= n_ - 1; ++k) {
                    double r_hat = c_ * std::pow(double(k), -gamma_);
                    d[static_cast<std::size_t>(k - m0_)] =
                        cx(r_hat, 0.0) * std::exp(lg.log_F(k + 1, n_ - 1));
                }
            } else {
                // Backward pass: S_k = sum_{l>k} h_l p^nu_{l-1}(q) / p^gamma_l(x),
                // so that G_{k+1,n-1} = (p^gamma_{n-1}(x)/p^nu_k(q)) S_k.
                ScaledSum suffix;
                for (long k = n_ - 1; k >= m0_; --k) {
                    double r_hat = c_ * std::pow(double(k), -gamma_);
                    double q_hat = q_ * std::pow(double(k), -nu_);
                    cx G = suffix.value_times_exp(lg.log_p(n_ - 1) - lq_.log_p(k));
                    cx Fq = std::exp(lq_.log_F(k + 1, n_ - 1));
                    d[static_cast<std::size_t>(k - m0_)] =
                        lambda * cx(r_hat, 0.0) * G + (cx(q_hat, 0.0) - cx(r_hat, 0.0) * g) * Fq;
                    // extend the suffix with l = k for the next (smaller) k
                    cx h = g_sum_h(k, x, q_, gamma_, nu_);
                    if (h != cx(0.0, 0.0))
                        suffix.add_log(std::log(h) + lq_.log_p(k - 1) - lg.log_p(k));
                }
            }
        }
        return cache_.emplace(key, std::move(d)).first->second;
    }

    cx pair_sum(LimitCase tag, int j1, int i1, int j2, int i2) {
        const auto& a = kernel(j1, i1);
        const auto& b = kernel(j2, i2);
        cx total(0.0, 0.0);
        for (std::size_t k = 0; k < a.size(); ++k) total += a[k] * b[k];
        return total * t_n_squared(tag, gamma_, nu_, n_);
    }

private:
    const SpectralData& spec_;
    double c_, q_, gamma_, nu_;
    long n_, m0_;
    PrefixLogs lq_;
    std::map<std::pair<int, int>, std::vector<cx>> cache_;
};

/// Numeric d^{j1(i1),j2(i2)} at horizon n (1-based j, i in {1,2}).
inline cx kernel_limit(int j1, int i1, int j2, int i2, LimitCase tag, const SpectralData& spec,
                  double c, double q, double gamma, double nu, long n) {
    KernelLimitEvaluator ev(spec, c, q, gamma, nu, n);
    return ev.pair_sum(tag, j1, i1, j2, i2);
}

/// Closed-form value of the same limit.
inline cx kernel_limit_value(int j1, int i1, int j2, int i2, LimitCase tag,
                         const SpectralData& spec, double c, double q, double gamma,
                         double nu) {
    auto alpha = [&](int j) { return spec.alphas[j - 1]; };
    auto lambda = [&](int j) { return spec.eigenvalues[j - 1]; };
    switch (tag) {
        case LimitCase::i: {
            double ind = (gamma == 1.0) ? 1.0 : 0.0;
            return c * c / (c * (alpha(j1) + alpha(j2)) - ind);
        }
        case LimitCase::ii:
            return cx(q / 2.0, 0.0);
        case LimitCase::iii: {
            double ind = (gamma == 1.0) ? 1.0 : 0.0;
            bool one1 = (j1 == 1), one2 = (j2 == 1);
            if (one1 && one2) return cx((q - c) * (q - c) / (2.0 * q - ind), 0.0);
            if (one1 && i2 == 1) return c * (q - c) / (c * alpha(j2) + q - ind);
            if (one2 && i1 == 1) return c * (q - c) / (c * alpha(j1) + q - ind);
            if (one1) // i2 == 2
                return q * (q - c) * (c + q - ind) /
                       ((c * alpha(j2) + q - ind) * (2.0 * q - ind));
            if (one2)
                return q * (q - c) * (c + q - ind) /
                       ((c * alpha(j1) + q - ind) * (2.0 * q - ind));
            if (i1 == 1 && i2 == 1) return c * c / (c * (alpha(j1) + alpha(j2)) - ind);
            if (i1 == 1 && i2 == 2)
                return c * q * (c * alpha(j1) + c - ind) /
                       ((c * alpha(j1) + c * alpha(j2) - ind) * (c * alpha(j1) + q - ind));
            if (i1 == 2 && i2 == 1)
                return c * q * (c * alpha(j2) + c - ind) /
                       ((c * alpha(j1) + c * alpha(j2) - ind) * (c * alpha(j2) + q - ind));
            cx a1 = alpha(j1), a2 = alpha(j2);
            cx den = (2.0 * q - ind) * (c * (a1 + a2) - ind) * (c * a1 + q - ind) *
                     (c * a2 + q - ind);
            cx num = c * c * c * (a1 + a2) + 2.0 * c * c * q * (a1 * a2 + 1.0) -
                     ind * c * c * (a1 * a2 + a1 + a2 + 2.0) +
                     c * (q - ind) * (q - ind) * (a1 + a2) -
                     ind * (2.0 * c + q - 1.0) * (q - 1.0);
            return q * q * num / den;
        }
        case LimitCase::iv:
            return c / (alpha(j1) + alpha(j2));
        case LimitCase::v: {
            double ind = (nu == 1.0) ? 1.0 : 0.0;
            return cx(c * c / (2.0 * q - ind * (2.0 * gamma - 1.0)), 0.0);
        }
        case LimitCase::vi: {
            double ind = (nu == 1.0) ? 1.0 : 0.0;
            cx a1 = alpha(j1), a2 = alpha(j2);
            cx l1 = lambda(j1), l2 = lambda(j2);
            return q * q *
                   ((l1 * l2 / (a1 * a2)) / (2.0 * q - ind * (2.0 * gamma - 1.0)) +
                    (l1 / a1 + l2 / a2) / (2.0 * q - ind * gamma) +
                    cx(1.0, 0.0) / (2.0 * q - ind));
        }
    }
    return cx(0.0, 0.0);
}

// Four-branch envelope check for sum_k k^-beta |F^delta_{k+1,n}(x)|^e.
struct BoundProbe {
    std::vector<long> horizons;
    std::vector<double> sums;
    std::vector<double> envelopes;
    double ratio_spread = 0.0; // max/min of sums[i]/envelopes[i]
    bool pass = false;
};

inline BoundProbe summation_bound_probe(double beta, double e, double delta, cx x, long n) {
    if (!(beta > 1.0)) throw Error(ErrorCode::ExponentOutOfRange, "need beta > 1");
    BoundProbe probe;
    probe.horizons = {n / 4, n / 2, n};
    long m0 = auto_m0(delta, x.real());
    double ax = x.real();
    for (long h : probe.horizons) {
        PrefixLogs pl = prefix_logs(h, delta, x, m0);
        double sum = 0.0;
        for (long k = m0; k <= h; ++k)
            sum += std::exp(e * pl.log_F(k + 1, h).real() - beta * std::log(double(k)));
        double env;
        if (delta < 1.0)
            env = std::pow(double(h), -(beta - delta));
        else if (e * ax < beta - 1.0)
            env = std::pow(double(h), -e * ax);
        else if (e * ax == beta - 1.0)
            env = std::pow(double(h), -(beta - 1.0)) * std::log(double(h));
        else
            env = std::pow(double(h), -(beta - 1.0));
        probe.sums.push_back(sum);
        probe.envelopes.push_back(env);
    }
    double lo = std::numeric_limits<double>::max(), hi = 0.0;
    for (std::size_t i = 0; i < probe.sums.size(); ++i) {
        double r = probe.sums[i] / probe.envelopes[i];
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    probe.ratio_spread = hi / lo;
    probe.pass = std::isfinite(probe.ratio_spread) && probe.ratio_spread < 3.0;
    return probe;
}

} // namespace rsp::numerics
