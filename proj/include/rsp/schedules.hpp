#pragma once

#include <cmath>
#include <string>

#include "rsp/errors.hpp"

namespace rsp {

// Step sequence r_{n-1} = c * n^{-gamma}, the exact leading term of the
// admissible class. Values are generated from the first index where they fall
// inside (0,1); the simulator consumes them through r_before_step, which
// shifts the index by that offset so every used value is admissible while
// (gamma, c) are unchanged.
struct RSchedule {
    double c = 1.0;
    double gamma = 1.0;
    long first_index = 1; // smallest n with c * n^-gamma < 1
    long offset = 0;      // first_index - 1
    bool polya_like = false;

    // Exact rule r_{n-1} = c n^-gamma, defined for n >= first_index.
    double r_hat(long n) const { return c * std::pow(double(n), -gamma); }

    // Value multiplying (X_n - Z_{n-1}) at simulation step n >= 1.
    double r_before_step(long n) const { return r_hat(n + offset); }
};

inline RSchedule make_r(double c, double gamma) {
    if (!(gamma > 0.5) || gamma > 1.0)
        throw Error(ErrorCode::ExponentOutOfRange,
                    "gamma must lie in (1/2,1]; the regime gamma <= 1/2 has a different "
                    "asymptotic behavior and is out of scope (got " +
                        std::to_string(gamma) + ")");
    if (!(c > 0.0))
        throw Error(ErrorCode::ExponentOutOfRange, "c must be positive");
    RSchedule r;
    r.c = c;
    r.gamma = gamma;
    r.first_index = 1;
    while (c * std::pow(double(r.first_index), -gamma) >= 1.0) ++r.first_index;
    r.offset = r.first_index - 1;
    r.polya_like = (c == 1.0 && gamma == 1.0);
    return r;
}

enum class WeightFamily { constant, power_sum, exp_sum };

inline const char* weight_family_name(WeightFamily f) {
    switch (f) {
        case WeightFamily::constant: return "constant";
        case WeightFamily::power_sum: return "power_sum";
        case WeightFamily::exp_sum: return "exp_sum";
    }
    return "?";
}

// Normalized weight sequences q_{n,k} = a_k / sum_{l<=n} a_l for the three
// analyzed families, with their asymptotic exponents (nu, q):
//   constant:   a_k = 1,                    (nu, q) = (1, 1)
//   power_sum:  sum_{l<=n} a_l = n^delta,   (nu, q) = (1, delta)
//   exp_sum:    sum_{l<=n} a_l = e^{b n^delta}, (nu, q) = (1-delta, b*delta)
// The tail condition n^nu q_{n,n} -> q already forces sum a_n = +infinity,
// so no separate divergence check is needed.
struct WeightSchedule {
    WeightFamily family = WeightFamily::constant;
    double delta = 0.0;
    double b = 0.0;
    double nu = 1.0;
    double q = 1.0;

    // log of the partial sum S_n = sum_{l<=n} a_l, with S_0 = 0.
    double log_partial_sum(long n) const {
        switch (family) {
            case WeightFamily::constant: return std::log(double(n));
            case WeightFamily::power_sum: return delta * std::log(double(n));
            case WeightFamily::exp_sum: return b * std::pow(double(n), delta);
        }
        return 0.0;
    }

    double a(long k) const {
        if (k == 1) return std::exp(log_partial_sum(1));
        return std::exp(log_partial_sum(k)) - std::exp(log_partial_sum(k - 1));
    }

    // q_{n,n} = 1 - S_{n-1}/S_n, computed in log space.
    double q_nn(long n) const {
        if (n == 1) return 1.0;
        return -std::expm1(log_partial_sum(n - 1) - log_partial_sum(n));
    }

    double q_nk(long n, long k) const {
        double ls = log_partial_sum(n);
        double hi = std::exp(log_partial_sum(k) - ls);
        double lo = (k == 1) ? 0.0 : std::exp(log_partial_sum(k - 1) - ls);
        return hi - lo;
    }
};

inline WeightSchedule make_weights_constant() {
    WeightSchedule w;
    w.family = WeightFamily::constant;
    w.nu = 1.0;
    w.q = 1.0;
    return w;
}

inline WeightSchedule make_weights_power_sum(double delta) {
    if (!(delta > 0.0))
        throw Error(ErrorCode::DeltaOutOfRange, "power_sum needs delta > 0");
    WeightSchedule w;
    w.family = WeightFamily::power_sum;
    w.delta = delta;
    w.nu = 1.0;
    w.q = delta;
    return w;
}

inline WeightSchedule make_weights_exp_sum(double b, double delta) {
    if (!(delta > 0.0) || !(delta < 0.5))
        throw Error(ErrorCode::DeltaOutOfRange, "exp_sum needs delta in (0, 1/2), got " +
                                                    std::to_string(delta));
    if (!(b > 0.0))
        throw Error(ErrorCode::DeltaOutOfRange, "exp_sum needs b > 0");
    WeightSchedule w;
    w.family = WeightFamily::exp_sum;
    w.delta = delta;
    w.b = b;
    w.nu = 1.0 - delta;
    w.q = b * delta;
    return w;
}

// Asymptotic regime of the pair (gamma, nu): case tags of the joint CLT, of
// the CLT for N-tilde and of the one for N-prime, with the rate exponents
// (power of n multiplying the centered quantity).
struct Regime {
    double gamma = 1.0;
    double nu = 1.0;
    double gamma0 = 1.0; // max{1/2, 2*gamma - 1}
    char caseY = 'd';
    char caseNtilde = 'c';
    char caseNprime = 'b';
    double rateY = 0.5;
    double rateNtilde = 0.5;
    double rateNprime = 0.5;
};

inline Regime classify_regime(double gamma, double nu) {
    if (!(gamma > 0.5) || gamma > 1.0 || !(nu > 0.5) || nu > 1.0)
        throw Error(ErrorCode::ExponentOutOfRange, "gamma and nu must lie in (1/2,1]");
    Regime r;
    r.gamma = gamma;
    r.nu = nu;
    r.gamma0 = std::max(0.5, 2.0 * gamma - 1.0);

    if (nu < r.gamma0)
        r.caseY = 'a';
    else if (nu == r.gamma0)
        r.caseY = (nu == 1.0) ? 'd' : 'c';
    else
        r.caseY = (nu == 1.0) ? 'e' : 'b';
    r.rateY = (r.caseY == 'a') ? nu / 2.0 : gamma - 0.5;

    if (nu < r.gamma0)
        r.caseNtilde = 'a';
    else if (nu == r.gamma0 || nu == 1.0)
        r.caseNtilde = 'c';
    else
        r.caseNtilde = 'b';
    r.rateNtilde = (r.caseNtilde == 'a') ? nu / 2.0 : gamma - 0.5;

    if (nu < gamma)
        r.caseNprime = 'a';
    else if (nu == gamma)
        r.caseNprime = 'b';
    else
        r.caseNprime = 'c';
    r.rateNprime = nu / 2.0;
    return r;
}

// The schedule hint from the rate analysis of N-tilde: beta(nu) is maximal at
// nu = gamma and the residual coefficient is minimal at q = c, so (gamma, c)
// is the distinguished choice; the interval (gamma0, 1) is where nu keeps the
// fastest rate with the smallest variance.
struct ScheduleRecommendation {
    double nu = 1.0;
    double q = 1.0;
    double optimal_nu_lo = 0.5;
    double optimal_nu_hi = 1.0;
    std::string note;
};

inline ScheduleRecommendation recommend_schedule(double gamma, double c) {
    if (!(gamma > 0.5) || gamma > 1.0)
        throw Error(ErrorCode::ExponentOutOfRange, "gamma must lie in (1/2,1]");
    if (!(c > 0.0))
        throw Error(ErrorCode::ExponentOutOfRange, "c must be positive");
    ScheduleRecommendation rec;
    rec.nu = gamma;
    rec.q = c;
    rec.optimal_nu_lo = std::max(0.5, 2.0 * gamma - 1.0);
    rec.optimal_nu_hi = 1.0;
    rec.note = (gamma == 1.0 && c == 1.0)
                   ? "nu = q = 1: plain empirical means"
                   : "residual rate is maximal at nu = gamma and its coefficient minimal at q = c";
    return rec;
}

} // namespace rsp
