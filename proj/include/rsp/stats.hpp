#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "rsp/errors.hpp"

namespace rsp::stats {

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x),
// series for x < a+1 and Lentz continued fraction otherwise. Relative
// accuracy ~1e-14 over the ranges used here.

namespace detail {

inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace detail

inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw Error(ErrorCode::ConfigError, "gamma_p domain");
    if (x == 0.0) return 0.0;
    return (x < a + 1.0) ? detail::gamma_p_series(a, x) : 1.0 - detail::gamma_q_cf(a, x);
}

inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw Error(ErrorCode::ConfigError, "gamma_q domain");
    if (x == 0.0) return 1.0;
    return (x < a + 1.0) ? 1.0 - detail::gamma_p_series(a, x) : detail::gamma_q_cf(a, x);
}

/// Upper tail of chi-square with k degrees of freedom.
inline double chi2_sf(double x, int k) {
    if (k < 1) throw Error(ErrorCode::ConfigError, "chi2 needs dof >= 1");
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * k, 0.5 * x);
}

inline double chi2_cdf(double x, int k) { return 1.0 - chi2_sf(x, k); }

/// Upper-tail quantile: smallest x with chi2_sf(x, k) <= p, by bisection.
inline double chi2_quantile(double p_upper, int k) {
    double lo = 0.0, hi = 1.0;
    while (chi2_sf(hi, k) > p_upper) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (chi2_sf(mid, k) > p_upper ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Wichura's AS 241 (PPND16): inverse standard normal, ~1e-15 accuracy.
inline double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw Error(ErrorCode::ConfigError, "quantile needs p in (0,1)");
    double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.87187007492057908300e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 5.41637960436794458180e-1);
    }
    return (q < 0.0) ? -val : val;
}

/// Two-sided z for a central confidence level (0.95 -> 1.959964...).
inline double normal_two_sided_z(double level) {
    if (!(level > 0.0) || !(level < 1.0))
        throw Error(ErrorCode::ConfigError, "confidence level must lie in (0,1)");
    return normal_quantile(0.5 * (1.0 + level));
}

/// Kolmogorov-Smirnov distance of a sample against a continuous CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw Error(ErrorCode::ConfigError, "empty sample");
    std::sort(sample.begin(), sample.end());
    double n = double(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        d = std::max(d, std::max((double(i) + 1.0) / n - f, f - double(i) / n));
    }
    return d;
}

inline double ks_vs_standard_normal(std::vector<double> sample) {
    return ks_distance(std::move(sample), [](double x) { return normal_cdf(x); });
}

inline double ks_vs_uniform01(std::vector<double> sample) {
    return ks_distance(std::move(sample),
                       [](double x) { return std::clamp(x, 0.0, 1.0); });
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

inline double variance(const std::vector<double>& v) {
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / double(v.size() - 1);
}

} // namespace rsp::stats
