#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsp/asymptotics.hpp"
#include "rsp/errors.hpp"
#include "rsp/linalg.hpp"
#include "rsp/simulator.hpp"
#include "rsp/stats.hpp"

namespace rsp::verify {

// Standardized per-replica statistics. Replicas whose plug-in variance
// factor N-tilde(1 - N-tilde) falls below the floor are absorbed paths: the
// CLT factor Z(1-Z) vanishes there, so they are excluded and counted.
struct ResidualSample {
    int components = 0;
    std::vector<VectorXd> values; // one vector per retained replica
    int excluded = 0;
    int total = 0;

    double exclusion_fraction() const {
        return total == 0 ? 0.0 : double(excluded) / double(total);
    }
    std::vector<double> component(int i) const {
        std::vector<double> out;
        out.reserve(values.size());
        for (const auto& v : values) out.push_back(v[i]);
        return out;
    }
};

inline constexpr double kAbsorbedFloor = 1e-6;

/// Residuals of N-tilde: n^rate (Ntilde_n - Ntilde_ref) / sqrt(plugin * var),
/// with the same-path longer horizon as the Z_inf proxy.
inline ResidualSample residuals_ntilde(const EnsembleResult& ensemble, long n, long n_ref,
                                       const CovarianceSpec& cov) {
    if (n_ref <= n)
        throw Error(ErrorCode::HorizonOrdering, "reference horizon must exceed n");
    ResidualSample out;
    out.components = 1;
    out.total = static_cast<int>(ensemble.replicas.size());
    double scale = std::pow(double(n), cov.rate_exponent);
    double var = cov.matrix(0, 0);
    for (const auto& traj : ensemble.replicas) {
        double nt = traj.at_step(n).ntilde;
        double zhat = traj.at_step(n_ref).ntilde;
        double plug = zhat * (1.0 - zhat);
        if (plug < kAbsorbedFloor) {
            ++out.excluded;
            continue;
        }
        VectorXd v(1);
        v[0] = scale * (nt - zhat) / std::sqrt(plug * var);
        out.values.push_back(v);
    }
    return out;
}

/// Whitened residuals of N': n^{nu/2} M^{-1/2} (coordinates of N') scaled by
/// the plug-in sqrt(Ntilde(1-Ntilde)); each component is asymptotically
/// standard normal under H0.
inline ResidualSample residuals_nprime(const EnsembleResult& ensemble, long n,
                                       const SpectralData& spec, const Regime& regime,
                                       double c, double q) {
    MatrixXcd m = nprime_limit_matrix(regime, spec, c, q, regime.gamma, regime.nu);
    MatrixXcd m_block = m.block(1, 1, spec.n - 1, spec.n - 1);
    std::vector<int> partner(spec.n - 1);
    for (int a = 2; a <= spec.n; ++a) partner[a - 2] = spec.partner[a - 1] - 1;
    PairBasis basis = PairBasis::build(partner);
    MatrixXd white = sym_inv_sqrt(basis.realify_matrix(m_block));

    ResidualSample out;
    out.components = spec.n - 1;
    out.total = static_cast<int>(ensemble.replicas.size());
    double scale = std::pow(double(n), regime.rateNprime);
    for (const auto& traj : ensemble.replicas) {
        const Checkpoint& cp = traj.at_step(n);
        double plug = cp.ntilde * (1.0 - cp.ntilde);
        if (plug < kAbsorbedFloor) {
            ++out.excluded;
            continue;
        }
        VectorXcd xi(spec.n - 1);
        for (int a = 2; a <= spec.n; ++a)
            xi[a - 2] = spec.V.col(a - 1).transpose() * cp.nw.cast<cx>();
        VectorXd t = basis.realify_vector(xi) * scale;
        out.values.push_back(VectorXd(white * t / std::sqrt(plug)));
    }
    return out;
}

struct ComponentCheck {
    int component = 0;
    double mean = 0.0;
    double variance = 0.0;
    double ks_normal = 0.0;
    bool pass = false;
};

struct CovarianceReport {
    std::vector<ComponentCheck> components;
    MatrixXd empirical_covariance;
    double max_offdiag_error = 0.0;
    double exclusion_fraction = 0.0;
    bool exclusion_ok = true;
    bool pass = false;
};

struct ResidualTolerances {
    double mean_abs = 0.05;
    double var_lo = 0.9;
    double var_hi = 1.1;
    double ks = 0.03;
    double offdiag = 0.1;
    double exclusion = 0.05;
};

/// Componentwise mean/variance/KS-vs-normal checks plus the off-diagonal
/// covariance error against the identity (or a supplied target).
inline CovarianceReport compare_covariance(const ResidualSample& sample,
                                           const ResidualTolerances& tol = {},
                                           const MatrixXd* target = nullptr) {
    if (sample.values.empty()) throw Error(ErrorCode::ConfigError, "empty residual sample");
    const int d = sample.components;
    const int r = static_cast<int>(sample.values.size());
    CovarianceReport rep;
    rep.exclusion_fraction = sample.exclusion_fraction();
    rep.exclusion_ok = rep.exclusion_fraction < tol.exclusion;

    VectorXd mean = VectorXd::Zero(d);
    for (const auto& v : sample.values) mean += v;
    mean /= double(r);
    MatrixXd cov = MatrixXd::Zero(d, d);
    for (const auto& v : sample.values) {
        VectorXd u = v - mean;
        cov += u * u.transpose();
    }
    cov /= double(r - 1);
    rep.empirical_covariance = cov;

    bool all = rep.exclusion_ok;
    for (int i = 0; i < d; ++i) {
        ComponentCheck c;
        c.component = i;
        c.mean = mean[i];
        c.variance = cov(i, i);
        c.ks_normal = stats::ks_vs_standard_normal(sample.component(i));
        c.pass = std::abs(c.mean) < tol.mean_abs && c.variance > tol.var_lo &&
                 c.variance < tol.var_hi && c.ks_normal < tol.ks;
        all = all && c.pass;
        rep.components.push_back(c);
    }
    MatrixXd tgt = target ? *target : MatrixXd::Identity(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j)
                rep.max_offdiag_error =
                    std::max(rep.max_offdiag_error, std::abs(cov(i, j) - tgt(i, j)));
    if (d > 1) all = all && rep.max_offdiag_error < tol.offdiag;
    rep.pass = all;
    return rep;
}

struct RateProbe {
    std::vector<long> horizons;
    std::vector<double> sd; // cross-replica sd of consecutive-horizon differences
    double fitted_slope = 0.0;
    double expected_slope = 0.0;
    double tolerance = 0.05;
    bool pass = false;
};

/// Empirical convergence rate: the cross-replica sd of N_{n_i,j} - N_{n_{i+1},j}
/// decays like n_i^{-rate} exactly (the unknown common limit cancels in the
/// difference, for both the martingale-dominated and the localized regimes),
/// so the slope of log sd against log n estimates -rate.
inline RateProbe rate_probe(const EnsembleResult& ensemble, const std::vector<long>& horizons,
                            double expected_rate, double tolerance = 0.05) {
    if (horizons.size() < 3)
        throw Error(ErrorCode::ConfigError, "rate probe needs at least 3 horizons");
    RateProbe probe;
    probe.expected_slope = -expected_rate;
    probe.tolerance = tolerance;
    const int agents = static_cast<int>(ensemble.replicas.front().at_step(horizons[0]).nw.size());
    for (std::size_t i = 0; i + 1 < horizons.size(); ++i) {
        double ss = 0.0;
        long count = 0;
        for (const auto& traj : ensemble.replicas) {
            VectorXd d = traj.at_step(horizons[i]).nw - traj.at_step(horizons[i + 1]).nw;
            ss += d.squaredNorm();
            count += agents;
        }
        probe.horizons.push_back(horizons[i]);
        probe.sd.push_back(std::sqrt(ss / double(count)));
    }
    // least-squares slope of log sd on log n
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = double(probe.horizons.size());
    for (std::size_t i = 0; i < probe.horizons.size(); ++i) {
        double x = std::log(double(probe.horizons[i]));
        double y = std::log(probe.sd[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    probe.fitted_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    probe.pass = std::abs(probe.fitted_slope - probe.expected_slope) <= tolerance;
    return probe;
}

} // namespace rsp::verify
