#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "rsp/errors.hpp"
#include "rsp/linalg.hpp"
#include "rsp/network.hpp"
#include "rsp/rng.hpp"
#include "rsp/schedules.hpp"
#include "rsp/spectral.hpp"

namespace rsp {

// State of the coupled recursion at step n: inclinations Z_n, weighted
// empirical means N_n (zero at step 0) and the actions drawn at step n.
struct SystemState {
    long step = 0;
    VectorXd z;
    VectorXd nw;
    Eigen::VectorXi last_x;
};

inline SystemState init_state(const VectorXd& z0) {
    for (int i = 0; i < z0.size(); ++i)
        if (z0[i] < 0.0 || z0[i] > 1.0)
            throw Error(ErrorCode::ComponentOutOfRange,
                        "Z_0[" + std::to_string(i) + "] = " + std::to_string(z0[i]));
    SystemState s;
    s.step = 0;
    s.z = z0;
    s.nw = VectorXd::Zero(z0.size());
    s.last_x = Eigen::VectorXi::Zero(z0.size());
    return s;
}

/// One transition n -> n+1. Draws the N actions (one uniform per agent, in
/// agent order), then updates Z with r_n and N with q_{n+1,n+1}.
inline void step_system(SystemState& state, const WeightedNetwork& net,
                        const RSchedule& r_sched, const WeightSchedule& w_sched,
                        Xoshiro256pp& rng) {
    const int n_agents = net.n_agents;
    if (state.z.size() != n_agents)
        throw Error(ErrorCode::DimensionMismatch, "state/network size mismatch");
    const long next = state.step + 1;
    VectorXd p = net.weights.transpose() * state.z;
    for (int j = 0; j < n_agents; ++j) {
        double pj = p[j];
        if (pj < -1e-15 || pj > 1.0 + 1e-15)
            throw Error(ErrorCode::ProbabilityOutOfUnit,
                        "agent " + std::to_string(j) + " probability " + std::to_string(pj));
        pj = std::clamp(pj, 0.0, 1.0);
        state.last_x[j] = rng.uniform() < pj ? 1 : 0;
    }
    const double r = r_sched.r_before_step(next);
    const double qnn = w_sched.q_nn(next);
    for (int j = 0; j < n_agents; ++j) {
        double x = double(state.last_x[j]);
        state.z[j] = (1.0 - r) * state.z[j] + r * x;
        state.nw[j] = (1.0 - qnn) * state.nw[j] + qnn * x;
    }
    state.step = next;
}

struct Projections {
    double ntilde = 0.0;
    double ztilde = 0.0;
    VectorXd nprime;
};

/// Decomposition coordinates: N-tilde = N^{-1/2} v_1^T N_n, Z-tilde likewise
/// on Z_n, and N' = (I - u_1 v_1^T) N_n. Imaginary parts must stay below
/// 1e-10 (v_1 is real positive) and are dropped after the check.
inline Projections project(const SystemState& state, const SpectralData& spec) {
    if (state.z.size() != spec.n)
        throw Error(ErrorCode::DimensionMismatch, "state/spectral size mismatch");
    double root_n = std::sqrt(double(spec.n));
    cx vn = spec.V.col(0).transpose() * state.nw.cast<cx>();
    cx vz = spec.V.col(0).transpose() * state.z.cast<cx>();
    if (std::abs(vn.imag()) > 1e-10 || std::abs(vz.imag()) > 1e-10)
        throw Error(ErrorCode::EigensolverFailure, "projection has an imaginary part");
    Projections pr;
    pr.ntilde = vn.real() / root_n;
    pr.ztilde = vz.real() / root_n;
    pr.nprime = state.nw.array() - pr.ntilde;
    return pr;
}

struct Checkpoint {
    long step = 0;
    VectorXd z;
    VectorXd nw;
    Eigen::VectorXi x;
    double ntilde = 0.0;
    double ztilde = 0.0;
    VectorXd nprime;
};

struct Trajectory {
    std::uint64_t seed = 0;
    std::string config_fingerprint;
    std::vector<Checkpoint> checkpoints;
    Eigen::MatrixXi actions; // full per-step history; empty unless requested

    const Checkpoint& at_step(long n) const {
        for (const auto& c : checkpoints)
            if (c.step == n) return c;
        throw Error(ErrorCode::HorizonOrdering, "no checkpoint at step " + std::to_string(n));
    }
};

// Initial inclinations: a fixed vector or iid uniforms drawn per replica
// (N extra draws from the replica stream before the process starts).
struct InitSpec {
    enum class Kind { fixed, uniform_iid } kind = Kind::fixed;
    VectorXd fixed; // broadcast if size 1

    static InitSpec fixed_vector(VectorXd v) { return InitSpec{Kind::fixed, std::move(v)}; }
    static InitSpec uniform() { return InitSpec{Kind::uniform_iid, {}}; }

    VectorXd draw(int n_agents, Xoshiro256pp& rng) const {
        if (kind == Kind::uniform_iid) {
            VectorXd z(n_agents);
            for (int i = 0; i < n_agents; ++i) z[i] = rng.uniform();
            return z;
        }
        if (fixed.size() == 1) return VectorXd::Constant(n_agents, fixed[0]);
        if (fixed.size() != n_agents)
            throw Error(ErrorCode::DimensionMismatch, "Z_0 length does not match N");
        return fixed;
    }
};

inline Trajectory run_trajectory(const WeightedNetwork& net, const SpectralData& spec,
                                 const RSchedule& r_sched, const WeightSchedule& w_sched,
                                 const InitSpec& init, long horizon,
                                 std::vector<long> checkpoint_steps, std::uint64_t seed,
                                 std::string fingerprint = {}, bool record_actions = false) {
    if (horizon < 1) throw Error(ErrorCode::HorizonOrdering, "horizon must be >= 1");
    std::sort(checkpoint_steps.begin(), checkpoint_steps.end());
    checkpoint_steps.erase(std::unique(checkpoint_steps.begin(), checkpoint_steps.end()),
                           checkpoint_steps.end());
    for (long s : checkpoint_steps)
        if (s < 1 || s > horizon)
            throw Error(ErrorCode::HorizonOrdering,
                        "checkpoint " + std::to_string(s) + " outside [1, horizon]");

    Xoshiro256pp rng(seed);
    SystemState state = init_state(init.draw(net.n_agents, rng));

    Trajectory traj;
    traj.seed = seed;
    traj.config_fingerprint = std::move(fingerprint);
    if (record_actions) traj.actions.resize(horizon, net.n_agents);
    std::size_t next_cp = 0;
    for (long n = 1; n <= horizon; ++n) {
        step_system(state, net, r_sched, w_sched, rng);
        if (record_actions) traj.actions.row(n - 1) = state.last_x.transpose();
        if (next_cp < checkpoint_steps.size() && checkpoint_steps[next_cp] == n) {
            Projections pr = project(state, spec);
            traj.checkpoints.push_back(Checkpoint{n, state.z, state.nw, state.last_x,
                                                  pr.ntilde, pr.ztilde, pr.nprime});
            ++next_cp;
        }
    }
    return traj;
}

struct EnsembleResult {
    std::uint64_t master_seed = 0;
    std::string config_fingerprint;
    std::vector<Trajectory> replicas;
};

/// Replica r runs on its own stream seeded by split_seed(master, r); results
/// land in slot r, so aggregation is independent of thread count and order.
inline EnsembleResult run_ensemble(const WeightedNetwork& net, const SpectralData& spec,
                                   const RSchedule& r_sched, const WeightSchedule& w_sched,
                                   const InitSpec& init, long horizon,
                                   const std::vector<long>& checkpoint_steps, int replicas,
                                   std::uint64_t master_seed, int threads = 0,
                                   std::string fingerprint = {}, bool record_actions = false) {
    if (replicas < 1) throw Error(ErrorCode::ConfigError, "replicas must be >= 1");
    EnsembleResult out;
    out.master_seed = master_seed;
    out.config_fingerprint = fingerprint;
    out.replicas.resize(replicas);

    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, replicas));

    std::atomic<int> cursor{0};
    auto worker = [&]() {
        for (;;) {
            int r = cursor.fetch_add(1);
            if (r >= replicas) return;
            out.replicas[r] =
                run_trajectory(net, spec, r_sched, w_sched, init, horizon, checkpoint_steps,
                               split_seed(master_seed, static_cast<std::uint64_t>(r)),
                               fingerprint, record_actions);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return out;
}

} // namespace rsp
