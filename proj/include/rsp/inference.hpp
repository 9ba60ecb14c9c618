#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsp/asymptotics.hpp"
#include "rsp/errors.hpp"
#include "rsp/linalg.hpp"
#include "rsp/schedules.hpp"
#include "rsp/spectral.hpp"
#include "rsp/stats.hpp"

namespace rsp {

// Observed actions X_{k,j}: the one quantity a field study can actually
// record. Everything in this module is built on them alone.
struct ActionRecord {
    long steps = 0;
    Eigen::MatrixXi actions; // steps x N, entries in {0,1}
};

/// Weighted empirical means N_n at n = up_to, by the defining recursion
/// N_k = (1 - q_{k,k}) N_{k-1} + q_{k,k} X_k.
inline VectorXd weighted_means(const ActionRecord& rec, const WeightSchedule& w_sched,
                               long up_to = -1) {
    long n = (up_to < 0) ? rec.steps : up_to;
    if (n < 1 || n > rec.steps)
        throw Error(ErrorCode::HorizonOrdering, "requested step outside the record");
    const int agents = static_cast<int>(rec.actions.cols());
    VectorXd nw = VectorXd::Zero(agents);
    for (long k = 1; k <= n; ++k) {
        double qkk = w_sched.q_nn(k);
        for (int j = 0; j < agents; ++j)
            nw[j] = (1.0 - qkk) * nw[j] + qkk * double(rec.actions(k - 1, j));
    }
    return nw;
}

inline double ntilde_of(const VectorXd& nw, const SpectralData& spec) {
    cx v = spec.V.col(0).transpose() * nw.cast<cx>();
    return v.real() / std::sqrt(double(spec.n));
}

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 1.0;
    double ntilde = 0.0;
    double rate = 0.0;
    double variance = 0.0;
    long n_used = 0;
    std::vector<std::string> warnings;
};

/// Asymptotic confidence interval for the common limit Z_inf, from the
/// observable N-tilde alone: plug in N-tilde for Z_inf in the CLT variance
/// Z(1-Z) * sigma^2 and invert at the requested level.
inline ConfidenceInterval confidence_interval(const VectorXd& nw, long n,
                                              const SpectralData& spec,
                                              const WeightSchedule& w_sched, double gamma,
                                              double c, double level) {
    Regime regime = classify_regime(gamma, w_sched.nu);
    CovarianceSpec cov = covariance_Ntilde(regime, spec, c, w_sched.q, gamma, w_sched.nu);
    ConfidenceInterval ci;
    ci.n_used = n;
    ci.ntilde = ntilde_of(nw, spec);
    ci.rate = cov.rate_exponent;
    ci.variance = cov.matrix(0, 0);
    double z_var = ci.ntilde * (1.0 - ci.ntilde);
    if (z_var < 1e-12)
        throw Error(ErrorCode::DegenerateVariance,
                    "N-tilde(1 - N-tilde) = " + std::to_string(z_var) +
                        "; the path looks absorbed at 0 or 1");
    double half = stats::normal_two_sided_z(level) * std::sqrt(z_var * ci.variance) /
                  std::pow(double(n), ci.rate);
    ci.lo = std::max(0.0, ci.ntilde - half);
    ci.hi = std::min(1.0, ci.ntilde + half);
    if (n < 1000)
        ci.warnings.push_back("n < 1000: the asymptotic approximation may be inaccurate");
    return ci;
}

inline ConfidenceInterval confidence_interval(const ActionRecord& rec,
                                              const SpectralData& spec,
                                              const WeightSchedule& w_sched, double gamma,
                                              double c, double level) {
    return confidence_interval(weighted_means(rec, w_sched), rec.steps, spec, w_sched, gamma,
                               c, level);
}

struct TestReport {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    long n_used = 0;
    double plug_in_ntilde = 0.0;
    char caseNprime = 'a';
    double rate = 0.0;
    bool mean_field_path = false;
    std::vector<std::string> warnings;
};

namespace detail {

// Spectral coordinates of N' in the dual basis: xi_a = v_a^T N_n, a = 2..N.
inline VectorXcd nprime_coordinates(const VectorXd& nw, const SpectralData& spec) {
    VectorXcd xi(spec.n - 1);
    for (int a = 2; a <= spec.n; ++a) xi[a - 2] = spec.V.col(a - 1).transpose() * nw.cast<cx>();
    return xi;
}

} // namespace detail

/// chi-square statistic from the weighted means at horizon n: whiten
/// T = n^{nu/2} (coordinates of N') with the case-appropriate limit matrix
/// restricted to indices 2..N and plug in N-tilde for Z_inf. Under H0 the
/// statistic is asymptotically chi-square with N-1 degrees of freedom.
inline TestReport chi_square_from_means(const VectorXd& nw, long n, const SpectralData& spec,
                                        const WeightSchedule& w_sched, double c,
                                        double gamma) {
    Regime regime = classify_regime(gamma, w_sched.nu);

    TestReport rep;
    rep.n_used = n;
    rep.dof = spec.n - 1;
    rep.caseNprime = regime.caseNprime;
    rep.rate = regime.rateNprime;

    rep.plug_in_ntilde = ntilde_of(nw, spec);
    double z_var = rep.plug_in_ntilde * (1.0 - rep.plug_in_ntilde);
    if (z_var < 1e-12)
        throw Error(ErrorCode::DegenerateVariance, "plug-in N-tilde is absorbed at 0 or 1");

    MatrixXcd m = nprime_limit_matrix(regime, spec, c, w_sched.q, gamma, w_sched.nu);
    MatrixXcd m_block = m.block(1, 1, spec.n - 1, spec.n - 1);

    std::vector<int> partner(spec.n - 1);
    for (int a = 2; a <= spec.n; ++a) partner[a - 2] = spec.partner[a - 1] - 1;
    PairBasis basis = PairBasis::build(partner);

    VectorXcd xi = detail::nprime_coordinates(nw, spec);
    VectorXd t_real = basis.realify_vector(xi) * std::pow(double(n), regime.rateNprime);
    MatrixXd m_real = basis.realify_matrix(m_block);
    MatrixXd white = sym_inv_sqrt(m_real); // throws SingularWhitening when degenerate
    VectorXd w = white * t_real;

    rep.statistic = w.squaredNorm() / z_var;
    rep.p_value = stats::chi2_sf(rep.statistic, rep.dof);
    if (n < 1000)
        rep.warnings.push_back("n < 1000: the asymptotic approximation may be inaccurate");
    return rep;
}

inline TestReport chi_square_w_test(const ActionRecord& rec, const WeightSchedule& w_sched,
                                    const WeightedNetwork& hypothesized, double c,
                                    double gamma) {
    SpectralData spec = spectral_decompose(hypothesized);
    if (rec.actions.cols() != spec.n)
        throw Error(ErrorCode::DimensionMismatch, "record width does not match N");
    return chi_square_from_means(weighted_means(rec, w_sched), rec.steps, spec, w_sched, c,
                                 gamma);
}

/// Mean-field fast path: only the projector I - 11^T/N and the scalar s*
/// enter, so no eigenvectors are needed.
inline TestReport chi_square_w_test_mean_field(const ActionRecord& rec,
                                               const WeightSchedule& w_sched, double alpha,
                                               int n_agents, double c, double gamma) {
    if (rec.actions.cols() != n_agents)
        throw Error(ErrorCode::DimensionMismatch, "record width does not match N");
    Regime regime = classify_regime(gamma, w_sched.nu);
    double s_star = mf_s_star(regime, alpha, c, w_sched.q);

    TestReport rep;
    rep.n_used = rec.steps;
    rep.dof = n_agents - 1;
    rep.caseNprime = regime.caseNprime;
    rep.rate = regime.rateNprime;
    rep.mean_field_path = true;

    VectorXd nw = weighted_means(rec, w_sched);
    double nbar = nw.mean(); // N-tilde: v_1 = N^{-1/2} 1 for doubly stochastic W
    rep.plug_in_ntilde = nbar;
    double z_var = nbar * (1.0 - nbar);
    if (z_var < 1e-12)
        throw Error(ErrorCode::DegenerateVariance, "plug-in N-tilde is absorbed at 0 or 1");

    VectorXd centered = nw.array() - nbar;
    rep.statistic = std::pow(double(rec.steps), w_sched.nu) * centered.squaredNorm() /
                    (z_var * s_star);
    rep.p_value = stats::chi2_sf(rep.statistic, rep.dof);
    if (rec.steps < 1000)
        rep.warnings.push_back("n < 1000: the asymptotic approximation may be inaccurate");
    return rep;
}

} // namespace rsp
