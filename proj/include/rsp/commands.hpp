#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsp/asymptotics.hpp"
#include "rsp/config.hpp"
#include "rsp/inference.hpp"
#include "rsp/io.hpp"
#include "rsp/network.hpp"
#include "rsp/numerics.hpp"
#include "rsp/simulator.hpp"
#include "rsp/spectral.hpp"
#include "rsp/verify.hpp"

namespace rsp::cmd {

using nlohmann::json;

inline WeightedNetwork network_from_config(const RunConfig& cfg) {
    if (cfg.network_type == "mean_field") return mean_field(cfg.n, cfg.alpha);
    if (cfg.network_type == "file") return validate_network(read_network_csv(cfg.network_file));
    throw Error(ErrorCode::ConfigError, "unknown network type '" + cfg.network_type + "'");
}

inline InitSpec init_from_config(const RunConfig& cfg) {
    if (cfg.z0 == "uniform") return InitSpec::uniform();
    const std::string prefix = "fixed:";
    if (cfg.z0.rfind(prefix, 0) == 0) {
        std::vector<double> vals;
        std::stringstream ss(cfg.z0.substr(prefix.size()));
        std::string tok;
        while (std::getline(ss, tok, ','))
            vals.push_back(detail::to_double(detail::trim(tok), "run.z0"));
        if (vals.empty()) throw Error(ErrorCode::ConfigError, "empty z0 list");
        VectorXd v(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
        return InitSpec::fixed_vector(v);
    }
    throw Error(ErrorCode::ConfigError, "z0 must be 'uniform' or 'fixed:...'");
}

/// Output directory: the environment variable RSP_OUT_DIR overrides the
/// configured path (and nothing else is overridable from the environment).
inline std::string resolve_out_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv("RSP_OUT_DIR")) return env;
    return cfg.out;
}

inline json complex_json(cx z) { return json::array({z.real(), z.imag()}); }

inline json matrix_json(const MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline json spectral_summary_json(const WeightedNetwork& net) {
    SpectralData spec = spectral_decompose(net);
    json j;
    j["valid"] = true;
    j["n"] = spec.n;
    json evs = json::array();
    for (int k = 0; k < spec.n; ++k) evs.push_back(complex_json(spec.eigenvalues[k]));
    j["eigenvalues"] = evs;
    if (spec.n >= 2) {
        j["lambda_star"] = complex_json(spec.lambda_star);
        j["a_star"] = spec.a_star;
    } else {
        j["lambda_star"] = nullptr;
        j["a_star"] = nullptr;
    }
    json v1 = json::array();
    for (int i = 0; i < spec.n; ++i) v1.push_back(spec.V(i, 0).real());
    j["v1"] = v1;
    j["v1_norm_sq"] = spec.v1_norm_sq;
    j["cond_U"] = spec.cond_U;
    return j;
}

inline int cmd_validate_network(const std::string& w_path, std::ostream& out) {
    try {
        WeightedNetwork net = validate_network(read_network_csv(w_path));
        out << spectral_summary_json(net).dump(2) << "\n";
        return 0;
    } catch (const Error& e) {
        json j;
        j["valid"] = false;
        j["error"] = error_code_name(e.code());
        j["detail"] = e.what();
        out << j.dump(2) << "\n";
        return 1;
    }
}

inline json covariance_json(const RunConfig& cfg) {
    WeightedNetwork net = network_from_config(cfg);
    SpectralData spec = spectral_decompose(net);
    WeightSchedule w = weights_from_config(cfg);
    Regime regime = classify_regime(cfg.gamma, w.nu);
    AssumptionReport assumptions = check_clt_assumptions(spec, cfg.gamma, cfg.c, w.nu, w.q);

    json j;
    j["config_fingerprint"] = config_fingerprint(cfg);
    j["gamma"] = cfg.gamma;
    j["c"] = cfg.c;
    j["nu"] = w.nu;
    j["q"] = w.q;
    j["gamma0"] = regime.gamma0;
    j["cases"] = {{"Y", std::string(1, regime.caseY)},
                  {"Ntilde", std::string(1, regime.caseNtilde)},
                  {"Nprime", std::string(1, regime.caseNprime)}};
    j["rates"] = {{"Y", regime.rateY},
                  {"Ntilde", regime.rateNtilde},
                  {"Nprime", regime.rateNprime}};
    j["assumptions"] = {{"pass", assumptions.pass},
                        {"failures", assumptions.failures},
                        {"warnings", assumptions.warnings}};

    CovarianceSpec cy = covariance_Y(regime, spec, cfg.c, w.q, cfg.gamma, w.nu);
    CovarianceSpec cn = covariance_Ntilde(regime, spec, cfg.c, w.q, cfg.gamma, w.nu);
    CovarianceSpec cp = covariance_Nprime(regime, spec, cfg.c, w.q, cfg.gamma, w.nu);
    j["Y"] = {{"rate", cy.rate_exponent}, {"matrix", matrix_json(cy.matrix)}};
    j["Ntilde"] = {{"rate", cn.rate_exponent}, {"variance", cn.matrix(0, 0)}};
    j["Nprime"] = {{"rate", cp.rate_exponent}, {"matrix", matrix_json(cp.matrix)}};

    SigmaTildeGamma st = sigma_tilde_gamma_sq(spec, cfg.c, cfg.gamma);
    j["sigma_tilde_gamma_sq"] = {{"value", st.value}, {"lower", st.lower}, {"upper", st.upper}};

    if (cfg.network_type == "mean_field") {
        j["mean_field"] = {{"alpha", cfg.alpha},
                           {"s_q", mf_s_q(w.q)},
                           {"s_star", mf_s_star(regime, cfg.alpha, cfg.c, w.q)}};
    }
    return j;
}

inline int cmd_covariance(const RunConfig& cfg, std::ostream& out) {
    out << covariance_json(cfg).dump(2) << "\n";
    return 0;
}

inline json ensemble_summary_json(const RunConfig& cfg, const EnsembleResult& ens) {
    json j;
    j["config_fingerprint"] = ens.config_fingerprint;
    j["master_seed"] = ens.master_seed;
    j["replicas"] = ens.replicas.size();
    j["horizon"] = cfg.horizon;
    json reps = json::array();
    for (const auto& traj : ens.replicas) {
        json r;
        r["seed"] = traj.seed;
        if (!traj.checkpoints.empty()) {
            const Checkpoint& last = traj.checkpoints.back();
            r["terminal_step"] = last.step;
            r["ntilde"] = last.ntilde;
            r["ztilde"] = last.ztilde;
            json z = json::array(), nw = json::array();
            for (int i = 0; i < last.z.size(); ++i) {
                z.push_back(last.z[i]);
                nw.push_back(last.nw[i]);
            }
            r["Z"] = z;
            r["Nw"] = nw;
        }
        reps.push_back(r);
    }
    j["replica_summaries"] = reps;
    return j;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    WeightedNetwork net = network_from_config(cfg);
    SpectralData spec = spectral_decompose(net);
    RSchedule r = make_r(cfg.c, cfg.gamma);
    WeightSchedule w = weights_from_config(cfg);
    std::vector<long> cps = cfg.checkpoints;
    if (cps.empty()) cps.push_back(cfg.horizon);
    std::string fp = config_fingerprint(cfg);

    EnsembleResult ens = run_ensemble(net, spec, r, w, init_from_config(cfg), cfg.horizon,
                                      cps, cfg.replicas, cfg.seed, cfg.threads, fp,
                                      cfg.export_actions);

    std::filesystem::path dir = resolve_out_dir(cfg);
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < ens.replicas.size(); ++i) {
        write_trajectory_csv((dir / ("trajectory_r" + std::to_string(i) + ".csv")).string(),
                             ens.replicas[i]);
        if (cfg.export_actions)
            write_actions_csv((dir / ("actions_r" + std::to_string(i) + ".csv")).string(),
                              ens.replicas[i].actions);
    }
    std::ofstream summary(dir / "ensemble.json");
    summary << ensemble_summary_json(cfg, ens).dump(2) << "\n";
    log << "wrote " << ens.replicas.size() << " trajectories to " << dir.string() << "\n";
    return 0;
}

inline json ci_json(const std::string& data_path, const RunConfig& cfg, double level) {
    ActionRecord rec = read_actions_csv(data_path);
    WeightedNetwork net = network_from_config(cfg);
    SpectralData spec = spectral_decompose(net);
    WeightSchedule w = weights_from_config(cfg);
    ConfidenceInterval ci = confidence_interval(rec, spec, w, cfg.gamma, cfg.c, level);
    json j;
    j["config_fingerprint"] = config_fingerprint(cfg);
    j["n_used"] = ci.n_used;
    j["ntilde"] = ci.ntilde;
    j["rate"] = ci.rate;
    j["variance"] = ci.variance;
    j["level"] = level;
    j["lo"] = ci.lo;
    j["hi"] = ci.hi;
    j["warnings"] = ci.warnings;
    return j;
}

inline int cmd_ci(const std::string& data_path, const RunConfig& cfg, double level,
                  std::ostream& out) {
    out << ci_json(data_path, cfg, level).dump(2) << "\n";
    return 0;
}

inline json test_w_json(const std::string& data_path, const std::string& w_path,
                        const RunConfig& cfg) {
    ActionRecord rec = read_actions_csv(data_path);
    WeightedNetwork net =
        w_path.empty() ? network_from_config(cfg) : validate_network(read_network_csv(w_path));
    WeightSchedule w = weights_from_config(cfg);
    TestReport rep = chi_square_w_test(rec, w, net, cfg.c, cfg.gamma);
    json j;
    j["config_fingerprint"] = config_fingerprint(cfg);
    j["statistic"] = rep.statistic;
    j["dof"] = rep.dof;
    j["p_value"] = rep.p_value;
    j["n_used"] = rep.n_used;
    j["plug_in_ntilde"] = rep.plug_in_ntilde;
    j["case_Nprime"] = std::string(1, rep.caseNprime);
    j["rate"] = rep.rate;
    j["warnings"] = rep.warnings;
    return j;
}

inline int cmd_test_w(const std::string& data_path, const std::string& w_path,
                      const RunConfig& cfg, std::ostream& out) {
    out << test_w_json(data_path, w_path, cfg).dump(2) << "\n";
    return 0;
}

// Monte Carlo verification run: N-tilde residuals against a same-path
// reference horizon, whitened N' residuals, and the rate probe.
inline json verify_clt_json(const RunConfig& cfg, int replicas, long horizon, long n_ref,
                            int threads) {
    WeightedNetwork net = network_from_config(cfg);
    SpectralData spec = spectral_decompose(net);
    RSchedule r = make_r(cfg.c, cfg.gamma);
    WeightSchedule w = weights_from_config(cfg);
    Regime regime = classify_regime(cfg.gamma, w.nu);
    if (n_ref <= horizon) n_ref = 20 * horizon;

    std::vector<long> cps;
    for (double h = double(horizon) / 100.0; h < double(horizon) * 0.99; h *= std::sqrt(10.0)) {
        long hl = static_cast<long>(h);
        if (hl >= 1 && (cps.empty() || hl > cps.back())) cps.push_back(hl);
    }
    cps.push_back(horizon);
    cps.push_back(n_ref);
    std::string fp = config_fingerprint(cfg);
    EnsembleResult ens = run_ensemble(net, spec, r, w, init_from_config(cfg), n_ref, cps,
                                      replicas, cfg.seed, threads, fp);

    json checks = json::array();
    bool all_pass = true;
    auto add_component_checks = [&](const std::string& name,
                                    const verify::CovarianceReport& rep) {
        for (const auto& c : rep.components) {
            json j;
            j["name"] = name + "[" + std::to_string(c.component) + "]";
            j["mean"] = c.mean;
            j["variance"] = c.variance;
            j["ks_normal"] = c.ks_normal;
            j["pass"] = c.pass;
            checks.push_back(j);
            all_pass = all_pass && c.pass;
        }
        json e;
        e["name"] = name + ".exclusions";
        e["fraction"] = rep.exclusion_fraction;
        e["pass"] = rep.exclusion_ok;
        checks.push_back(e);
        all_pass = all_pass && rep.exclusion_ok;
    };

    CovarianceSpec cov_nt = covariance_Ntilde(regime, spec, cfg.c, w.q, cfg.gamma, w.nu);
    add_component_checks("ntilde_residuals",
                         verify::compare_covariance(
                             verify::residuals_ntilde(ens, horizon, n_ref, cov_nt)));
    add_component_checks(
        "nprime_residuals",
        verify::compare_covariance(
            verify::residuals_nprime(ens, horizon, spec, regime, cfg.c, w.q)));

    std::vector<long> probe_horizons(cps.begin(), cps.end() - 1);
    if (probe_horizons.size() >= 3) {
        verify::RateProbe probe = verify::rate_probe(ens, probe_horizons, regime.rateY);
        json pj;
        pj["name"] = "rate_probe";
        pj["fitted_slope"] = probe.fitted_slope;
        pj["expected_slope"] = probe.expected_slope;
        pj["pass"] = probe.pass;
        checks.push_back(pj);
        all_pass = all_pass && probe.pass;
    }

    json warnings = json::array();
    if (regime.nu != regime.gamma0 && std::abs(regime.nu - regime.gamma0) < 0.05)
        warnings.push_back("nu is within 0.05 of gamma0: finite-n bias near the regime "
                           "boundary is unquantified; results may be unreliable");

    json j;
    j["config_fingerprint"] = fp;
    j["replicas"] = replicas;
    j["horizon"] = horizon;
    j["n_ref"] = n_ref;
    j["checks"] = checks;
    j["warnings"] = warnings;
    j["pass"] = all_pass;
    return j;
}

inline int cmd_verify_clt(const RunConfig& cfg, int replicas, long horizon, long n_ref,
                          int threads, std::ostream& out) {
    json j = verify_clt_json(cfg, replicas, horizon, n_ref, threads);
    out << j.dump(2) << "\n";
    return j["pass"].get<bool>() ? 0 : 1;
}

// Deterministic oracle suite; the heavier limits run at the requested
// horizon scale.
inline json lemmas_json(long n_big = 1000000) {
    using namespace rsp::numerics;
    json suites = json::array();
    bool all = true;
    auto push = [&](const std::string& name, bool pass, json detail) {
        detail["name"] = name;
        detail["pass"] = pass;
        suites.push_back(detail);
        all = all && pass;
    };

    { // telescoping product
        ProductParams p = make_product_params(1.0, cx(1.0, 0.0));
        double err = std::abs(p_delta(1000, p) - cx(1e-3, 0.0));
        push("p_delta.telescope", err < 1e-14, {{"error", err}});
    }
    { // A-matrix closed form vs brute force
        SpectralData spec = spectral_decompose(mean_field(3, 0.5));
        double worst = 0.0;
        for (auto [g, nu] : {std::pair<double, double>{0.9, 0.6}, {0.8, 0.8}, {0.75, 0.9}})
            for (int j : {1, 2})
                worst = std::max(worst,
                                 (A_matrix_closed(j, 6, 49, spec, 1.0, 0.7, g, nu) -
                                  A_matrix_product(6, 49, spec.eigenvalues[j - 1], 1.0, 0.7,
                                                   g, nu))
                                     .cwiseAbs()
                                     .maxCoeff());
        push("A_matrix.closed_vs_product", worst < 1e-9, {{"max_error", worst}});
    }
    { // G identity at nu = gamma
        cx direct = G_sum(11, 200, cx(0.5, 0.0), 0.7, 0.8, 0.8);
        cx closed = G_closed_nu_eq_gamma(11, 200, cx(0.5, 0.0), 0.7, 0.8, 2);
        double err = std::abs(direct - closed);
        push("G.nu_eq_gamma_identity", err < 1e-10, {{"error", err}});
    }
    { // tail-sum three-branch limits
        double e1 = std::abs(tail_sum_limit(1.5, 0.75, 0.75, cx(1, 0), cx(1, 0), n_big) -
                             cx(0.5, 0.0));
        double e2 = std::abs(tail_sum_limit(1.5, 1.0, 1.0, cx(1, 0), cx(1, 0), n_big) -
                             cx(2.0 / 3.0, 0.0));
        double e3 =
            std::abs(tail_sum_limit(1.6, 0.6, 1.0, cx(2, 0), cx(1, 0), n_big) - cx(0.5, 0.0));
        push("tail_sum.three_branches",
             e1 < 0.01 && e2 < 0.01 * (2.0 / 3.0) && e3 < 0.01,
             {{"errors", {e1, e2, e3}}});
    }
    { // kernel limits on the mean-field grid (one representative per case; the
      // parameters are chosen where the finite-n corrections sit below 2%)
        SpectralData spec5 = spectral_decompose(mean_field(3, 0.5));
        SpectralData spec8 = spectral_decompose(mean_field(3, 0.8));
        struct Probe {
            LimitCase tag;
            int j1, i1, j2, i2;
            double gamma, nu, c, q;
            const SpectralData* spec;
        };
        std::vector<Probe> probes{
            {LimitCase::i, 2, 1, 3, 1, 1.0, 0.6, 1.2, 1.0, &spec8},
            {LimitCase::ii, 1, 2, 1, 2, 1.0, 0.6, 1.2, 1.0, &spec8},
            {LimitCase::iii, 2, 2, 3, 2, 0.6, 0.6, 1.0, 0.8, &spec5},
            {LimitCase::iii, 2, 2, 3, 2, 1.0, 1.0, 1.2, 0.9, &spec8},
            {LimitCase::iv, 2, 1, 2, 1, 0.6, 1.0, 1.0, 0.8, &spec5},
            {LimitCase::v, 1, 2, 1, 2, 0.6, 1.0, 1.0, 0.8, &spec5},
            {LimitCase::vi, 2, 2, 3, 2, 0.6, 1.0, 1.0, 0.8, &spec5}};
        double worst_rel = 0.0;
        for (const Probe& p : probes) {
            cx num = kernel_limit(p.j1, p.i1, p.j2, p.i2, p.tag, *p.spec, p.c, p.q, p.gamma, p.nu,
                             n_big);
            cx closed = kernel_limit_value(p.j1, p.i1, p.j2, p.i2, p.tag, *p.spec, p.c, p.q,
                                       p.gamma, p.nu);
            worst_rel = std::max(worst_rel, std::abs(num - closed) / std::abs(closed));
        }
        push("kernel_limits.six_cases", worst_rel < 0.02, {{"worst_rel_error", worst_rel}});
    }
    { // envelope probes
        BoundProbe b1 = summation_bound_probe(1.8, 1.0, 0.75, cx(1.0, 0.0), 200000);
        BoundProbe b2 = summation_bound_probe(2.0, 1.0, 1.0, cx(0.6, 0.0), 200000);
        push("summation_bounds", b1.pass && b2.pass,
             {{"spreads", {b1.ratio_spread, b2.ratio_spread}}});
    }

    json j;
    j["suites"] = suites;
    j["pass"] = all;
    return j;
}

inline int cmd_lemmas(const std::string& suite, std::ostream& out) {
    long n = (suite == "fast") ? 300000 : 1000000;
    json j = lemmas_json(n);
    out << j.dump(2) << "\n";
    return j["pass"].get<bool>() ? 0 : 1;
}

} // namespace rsp::cmd
