#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rsp/errors.hpp"
#include "rsp/network.hpp"
#include "rsp/schedules.hpp"

namespace rsp {

// Run configuration, stored as a sectioned key = value text file:
//
//   [network]
//   type = mean_field          # mean_field | file
//   n = 3
//   alpha = 0.5
//   # file = w.csv
//
//   [r_schedule]
//   c = 1.0
//   gamma = 0.8
//
//   [weights]
//   family = constant          # constant | power_sum | exp_sum
//   # delta = 0.3   (power_sum, exp_sum)
//   # b = 1.0       (exp_sum)
//
//   [run]
//   horizon = 100000
//   checkpoints = 1000,100000
//   replicas = 200
//   seed = 12345
//   z0 = fixed:0.5             # fixed:v | fixed:v1,v2,... | uniform
//   out = out
//   threads = 0
//   export_actions = 0         # 1: write full per-step action histories
//
// Comments start with '#'. Unknown keys are rejected so typos do not pass
// silently.
struct RunConfig {
    std::string network_type = "mean_field";
    int n = 2;
    double alpha = 0.5;
    std::string network_file;

    double c = 1.0;
    double gamma = 1.0;

    std::string family = "constant";
    double delta = 0.0;
    double b = 0.0;

    long horizon = 1000;
    std::vector<long> checkpoints;
    int replicas = 1;
    std::uint64_t seed = 1;
    std::string z0 = "fixed:0.5";
    std::string out = "out";
    int threads = 0;
    bool export_actions = false; // full per-step histories are large; off by default

    std::map<std::string, double> tolerances;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "bad number for " + key + ": '" + s + "'");
    }
}

inline long to_long(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "bad integer for " + key + ": '" + s + "'");
    }
}

} // namespace detail

inline RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error(ErrorCode::ConfigError,
                            "line " + std::to_string(lineno) + ": unterminated section");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ConfigError,
                        "line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        std::string full = section + "." + key;

        if (full == "network.type") cfg.network_type = val;
        else if (full == "network.n") cfg.n = static_cast<int>(detail::to_long(val, full));
        else if (full == "network.alpha") cfg.alpha = detail::to_double(val, full);
        else if (full == "network.file") cfg.network_file = val;
        else if (full == "r_schedule.c") cfg.c = detail::to_double(val, full);
        else if (full == "r_schedule.gamma") cfg.gamma = detail::to_double(val, full);
        else if (full == "weights.family") cfg.family = val;
        else if (full == "weights.delta") cfg.delta = detail::to_double(val, full);
        else if (full == "weights.b") cfg.b = detail::to_double(val, full);
        else if (full == "run.horizon") cfg.horizon = detail::to_long(val, full);
        else if (full == "run.checkpoints") {
            cfg.checkpoints.clear();
            std::stringstream ss(val);
            std::string tok;
            while (std::getline(ss, tok, ','))
                cfg.checkpoints.push_back(detail::to_long(detail::trim(tok), full));
        } else if (full == "run.replicas") cfg.replicas = static_cast<int>(detail::to_long(val, full));
        else if (full == "run.seed") cfg.seed = static_cast<std::uint64_t>(detail::to_long(val, full));
        else if (full == "run.z0") cfg.z0 = val;
        else if (full == "run.out") cfg.out = val;
        else if (full == "run.threads") cfg.threads = static_cast<int>(detail::to_long(val, full));
        else if (full == "run.export_actions") cfg.export_actions = detail::to_long(val, full) != 0;
        else if (section == "tolerances") cfg.tolerances[key] = detail::to_double(val, full);
        else throw Error(ErrorCode::ConfigError, "unknown key '" + full + "'");
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
    return parse_config(in);
}

inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "[network]\n";
    os << "type = " << cfg.network_type << "\n";
    if (cfg.network_type == "file") {
        os << "file = " << cfg.network_file << "\n";
    } else {
        os << "n = " << cfg.n << "\n";
        os << "alpha = " << cfg.alpha << "\n";
    }
    os << "\n[r_schedule]\n";
    os << "c = " << cfg.c << "\n";
    os << "gamma = " << cfg.gamma << "\n";
    os << "\n[weights]\n";
    os << "family = " << cfg.family << "\n";
    if (cfg.family == "power_sum") os << "delta = " << cfg.delta << "\n";
    if (cfg.family == "exp_sum") {
        os << "delta = " << cfg.delta << "\n";
        os << "b = " << cfg.b << "\n";
    }
    os << "\n[run]\n";
    os << "horizon = " << cfg.horizon << "\n";
    if (!cfg.checkpoints.empty()) {
        os << "checkpoints = ";
        for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i)
            os << (i ? "," : "") << cfg.checkpoints[i];
        os << "\n";
    }
    os << "replicas = " << cfg.replicas << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "z0 = " << cfg.z0 << "\n";
    os << "out = " << cfg.out << "\n";
    os << "threads = " << cfg.threads << "\n";
    os << "export_actions = " << (cfg.export_actions ? 1 : 0) << "\n";
    if (!cfg.tolerances.empty()) {
        os << "\n[tolerances]\n";
        for (const auto& [k, v] : cfg.tolerances) os << k << " = " << v << "\n";
    }
    return os.str();
}

// FNV-1a over the canonical serialization: a stable content hash embedded in
// every output for provenance.
inline std::string config_fingerprint(const RunConfig& cfg) {
    std::string s = serialize_config(cfg);
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline WeightSchedule weights_from_config(const RunConfig& cfg) {
    if (cfg.family == "constant") return make_weights_constant();
    if (cfg.family == "power_sum") return make_weights_power_sum(cfg.delta);
    if (cfg.family == "exp_sum") return make_weights_exp_sum(cfg.b, cfg.delta);
    throw Error(ErrorCode::ConfigError, "unknown weight family '" + cfg.family + "'");
}

} // namespace rsp
