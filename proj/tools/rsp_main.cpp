// Command-line front end: simulation, asymptotic covariances, inference and
// Monte Carlo verification for interacting reinforced stochastic processes
// on a weighted directed network.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rsp/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Interacting reinforced stochastic processes on networks"};
    app.require_subcommand(1);

    std::string config_path, data_path, w_path, out_path, suite = "all";
    double level = 0.95;
    int replicas = 0;
    long horizon = 0, n_ref = 0;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false, replicas_set = false;

    auto* validate = app.add_subcommand("validate-network",
                                        "Validate a network CSV and print its spectral summary");
    validate->add_option("--w", w_path, "network CSV file")->required();

    auto* covariance =
        app.add_subcommand("covariance", "Print regime tags, rates and covariance matrices");
    covariance->add_option("--config", config_path, "run config")->required();

    bool export_actions = false;
    auto* simulate = app.add_subcommand("simulate", "Run an ensemble and export trajectories");
    simulate->add_option("--config", config_path, "run config")->required();
    simulate->add_option("--replicas", replicas, "override replica count")
        ->each([&](const std::string&) { replicas_set = true; });
    simulate->add_option("--seed", seed, "override master seed")
        ->each([&](const std::string&) { seed_set = true; });
    simulate->add_option("--out", out_path, "override output directory");
    simulate->add_option("--threads", threads, "worker threads (0 = hardware)");
    simulate->add_flag("--export-actions", export_actions,
                       "also write per-replica action histories (actions_r<k>.csv)");

    auto* ci = app.add_subcommand("ci", "Confidence interval for the common limit");
    ci->add_option("--data", data_path, "actions CSV")->required();
    ci->add_option("--config", config_path, "run config")->required();
    ci->add_option("--level", level, "confidence level (default 0.95)");

    auto* testw = app.add_subcommand("test-w", "Chi-square test of a hypothesized W");
    testw->add_option("--data", data_path, "actions CSV")->required();
    testw->add_option("--w", w_path, "hypothesized W CSV (default: config network)");
    testw->add_option("--config", config_path, "run config")->required();

    auto* verify = app.add_subcommand("verify-clt", "Monte Carlo CLT verification");
    verify->add_option("--config", config_path, "run config")->required();
    verify->add_option("--replicas", replicas, "replicas (default from config)");
    verify->add_option("--horizon", horizon, "evaluation horizon (default from config)");
    verify->add_option("--nref", n_ref, "reference horizon (default 20x horizon)");
    verify->add_option("--threads", threads, "worker threads");
    verify->add_option("--out", out_path, "write the JSON report here as well");

    auto* lemmas = app.add_subcommand("lemmas", "Run the deterministic oracle suite");
    lemmas->add_option("--suite", suite, "all | fast");
    lemmas->add_option("--out", out_path, "write the JSON report here as well");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return rsp::cmd::cmd_validate_network(w_path, std::cout);

        if (covariance->parsed()) {
            rsp::RunConfig cfg = rsp::load_config(config_path);
            return rsp::cmd::cmd_covariance(cfg, std::cout);
        }
        if (simulate->parsed()) {
            rsp::RunConfig cfg = rsp::load_config(config_path);
            if (replicas_set) cfg.replicas = replicas;
            if (seed_set) cfg.seed = seed;
            if (!out_path.empty()) cfg.out = out_path;
            if (threads > 0) cfg.threads = threads;
            if (export_actions) cfg.export_actions = true;
            return rsp::cmd::cmd_simulate(cfg, std::cout);
        }
        if (ci->parsed()) {
            rsp::RunConfig cfg = rsp::load_config(config_path);
            return rsp::cmd::cmd_ci(data_path, cfg, level, std::cout);
        }
        if (testw->parsed()) {
            rsp::RunConfig cfg = rsp::load_config(config_path);
            return rsp::cmd::cmd_test_w(data_path, w_path, cfg, std::cout);
        }
        if (verify->parsed()) {
            rsp::RunConfig cfg = rsp::load_config(config_path);
            int reps = replicas > 0 ? replicas : cfg.replicas;
            long h = horizon > 0 ? horizon : cfg.horizon;
            int th = threads > 0 ? threads : cfg.threads;
            if (!out_path.empty()) {
                nlohmann::json j = rsp::cmd::verify_clt_json(cfg, reps, h, n_ref, th);
                std::ofstream f(out_path);
                f << j.dump(2) << "\n";
                std::cout << j.dump(2) << "\n";
                return j["pass"].get<bool>() ? 0 : 1;
            }
            return rsp::cmd::cmd_verify_clt(cfg, reps, h, n_ref, th, std::cout);
        }
        if (lemmas->parsed()) {
            if (!out_path.empty()) {
                long n = (suite == "fast") ? 300000 : 1000000;
                nlohmann::json j = rsp::cmd::lemmas_json(n);
                std::ofstream f(out_path);
                f << j.dump(2) << "\n";
                std::cout << j.dump(2) << "\n";
                return j["pass"].get<bool>() ? 0 : 1;
            }
            return rsp::cmd::cmd_lemmas(suite, std::cout);
        }
    } catch (const rsp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
