#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsp/config.hpp"
#include "rsp/errors.hpp"
#include "rsp/inference.hpp"
#include "rsp/linalg.hpp"
#include "rsp/simulator.hpp"

namespace rsp {

namespace detail {

// Shortest round-trip decimal form, so rewritten files are byte-stable.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = std::strtod(buf, nullptr);
    for (int prec = 1; prec < 17; ++prec) {
        char t[32];
        std::snprintf(t, sizeof t, "%.*g", prec, v);
        if (std::strtod(t, nullptr) == back) return t;
    }
    return buf;
}

} // namespace detail

/// Network CSV: row h on line h, comma-separated reals.
inline MatrixXd read_network_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open network file '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ','))
            row.push_back(detail::to_double(detail::trim(tok), "network entry"));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::IoError, "empty network file");
    const std::size_t n = rows.size();
    MatrixXd w(n, n);
    for (std::size_t h = 0; h < n; ++h) {
        if (rows[h].size() != n)
            throw Error(ErrorCode::IoError,
                        "row " + std::to_string(h) + " has " + std::to_string(rows[h].size()) +
                            " entries, expected " + std::to_string(n));
        for (std::size_t j = 0; j < n; ++j) w(h, j) = rows[h][j];
    }
    return w;
}

inline void write_network_csv(const std::string& path, const MatrixXd& w) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    for (int h = 0; h < w.rows(); ++h) {
        for (int j = 0; j < w.cols(); ++j)
            out << (j ? "," : "") << detail::format_double(w(h, j));
        out << "\n";
    }
}

/// Actions CSV: header step,agent_1..agent_N; binary entries; steps 1..n in
/// order with no gaps.
inline ActionRecord read_actions_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open actions file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::MalformedRow, "missing header");
    std::stringstream hs(line);
    std::string tok;
    std::vector<std::string> header;
    while (std::getline(hs, tok, ',')) header.push_back(detail::trim(tok));
    if (header.empty() || header[0] != "step")
        throw Error(ErrorCode::MalformedRow, "header must start with 'step'");
    const int agents = static_cast<int>(header.size()) - 1;
    if (agents < 1) throw Error(ErrorCode::MalformedRow, "no agent columns");
    for (int j = 0; j < agents; ++j)
        if (header[j + 1] != "agent_" + std::to_string(j + 1))
            throw Error(ErrorCode::MalformedRow, "expected column agent_" + std::to_string(j + 1));

    std::vector<std::vector<int>> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        std::stringstream ss(line);
        std::vector<std::string> cells;
        while (std::getline(ss, tok, ',')) cells.push_back(detail::trim(tok));
        if (static_cast<int>(cells.size()) != agents + 1)
            throw Error(ErrorCode::MalformedRow,
                        "line " + std::to_string(lineno) + ": expected " +
                            std::to_string(agents + 1) + " cells");
        long step = detail::to_long(cells[0], "step");
        if (step != static_cast<long>(rows.size()) + 1)
            throw Error(ErrorCode::GapInSteps, "line " + std::to_string(lineno) +
                                                   ": step " + std::to_string(step) +
                                                   " breaks the 1..n ordering");
        std::vector<int> row(agents);
        for (int j = 0; j < agents; ++j) {
            if (cells[j + 1] == "0") row[j] = 0;
            else if (cells[j + 1] == "1") row[j] = 1;
            else
                throw Error(ErrorCode::NonBinaryEntry, "line " + std::to_string(lineno) +
                                                           ": '" + cells[j + 1] + "'");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::MalformedRow, "no data rows");
    ActionRecord rec;
    rec.steps = static_cast<long>(rows.size());
    rec.actions.resize(rec.steps, agents);
    for (long k = 0; k < rec.steps; ++k)
        for (int j = 0; j < agents; ++j) rec.actions(k, j) = rows[k][j];
    return rec;
}

/// Trajectory export: one row per (checkpoint, agent) with Z, Nw and X.
inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << "step,agent,Z,Nw,X\n";
    for (const auto& cp : traj.checkpoints)
        for (int j = 0; j < cp.z.size(); ++j)
            out << cp.step << "," << (j + 1) << "," << detail::format_double(cp.z[j]) << ","
                << detail::format_double(cp.nw[j]) << "," << cp.x[j] << "\n";
}

/// Full action history export in the ingest format (needs every step
/// checkpointed or a dedicated recording run).
inline void write_actions_csv(const std::string& path, const Eigen::MatrixXi& actions) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << "step";
    for (int j = 0; j < actions.cols(); ++j) out << ",agent_" << (j + 1);
    out << "\n";
    for (long k = 0; k < actions.rows(); ++k) {
        out << (k + 1);
        for (int j = 0; j < actions.cols(); ++j) out << "," << actions(k, j);
        out << "\n";
    }
}

} // namespace rsp
