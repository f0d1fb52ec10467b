// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/bandwidth_agp.hpp"
#include "qot/model.hpp"
#include "qot/power_dual.hpp"

#include <chrono>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace qot {

struct SolverParams {
    AgpParams agp;
    DualParams dual;
    std::size_t ao_max_iters = 50;
    double ao_rel_tol = 1e-6;
    bool faithful_paper_mode = false;

    /// Fixed step sizes, no momentum restart, no bandwidth floor on iterates,
    /// plain subgradient multiplier updates and bisection on a numerical
    /// derivative for the per-vehicle power.
    static SolverParams faithful() {
        SolverParams p;
        p.faithful_paper_mode = true;
        p.agp.restart = false;
        p.agp.adaptive_step = false;
        p.agp.min_bandwidth_floor = 0.0;
        p.dual.safeguarded = false;
        p.dual.slack_search = SlackSearch::FiniteDifferenceBisection;
        p.dual.tol_power = 1e-6;
        return p;
    }

    void validate() const {
        if (!(agp.step_size > 0.0) || !(agp.rel_tol > 0.0) || agp.max_iters == 0)
            throw DomainError("AGP step size, tolerance and iteration cap must be positive");
        if (!(dual.xi > 0.0) || !(dual.tol_power > 0.0) || dual.max_iters == 0)
            throw DomainError("dual step, tolerance and iteration cap must be positive");
        if (!(ao_rel_tol > 0.0) || ao_max_iters == 0)
            throw DomainError("AO tolerance and iteration cap must be positive");
    }
};

struct InnerTrace {
    std::vector<double> agp;
    std::vector<DualIterate> dual;
};

struct SolveResult {
    Allocation allocation;
    double objective = kInfinity;
    Vector per_cav_samples;
    Vector per_cav_errors;
    double initial_objective = kInfinity;
    std::vector<double> ao_trace;  // objective after each AO round
    std::vector<InnerTrace> inner_traces;
    std::size_t agp_iterations = 0;
    std::size_t dual_iterations = 0;
    double wall_time_s = 0.0;
    double agp_time_s = 0.0;
    double dual_time_s = 0.0;
    bool converged = false;
};

/// Fills objective, samples and errors from the allocation.
inline void summarize(SolveResult& r, const Scenario& s) {
    const auto nk = static_cast<Eigen::Index>(s.num_cavs());
    r.per_cav_samples.resize(nk);
    r.per_cav_errors.resize(nk);
    for (std::size_t k = 0; k < s.num_cavs(); ++k) {
        const double v = sample_count(r.allocation, s, k);
        r.per_cav_samples(static_cast<Eigen::Index>(k)) = v;
        r.per_cav_errors(static_cast<Eigen::Index>(k)) = perception_error(v, s.cavs[k].curve);
    }
    r.objective = objective(r.allocation, s);
}

/// Equal bandwidth; power min(P_k, P_total P_k / sum_j P_j) in every slot.
inline Allocation equal_split(const Scenario& s) {
    const auto nk = static_cast<Eigen::Index>(s.num_cavs());
    const auto nn = static_cast<Eigen::Index>(s.num_slots);
    Allocation a{Matrix::Constant(nk, nn, s.total_bandwidth_hz / static_cast<double>(nk)), Matrix(nk, nn)};
    const double caps = s.sum_power_caps();
    for (Eigen::Index k = 0; k < nk; ++k) {
        const double cap = s.cavs[static_cast<std::size_t>(k)].power_cap_watts;
        a.power.row(k).setConstant(std::min(cap, s.total_power_watts * cap / caps));
    }
    return a;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Alternates bandwidth (accelerated gradient projection) and power (dual
/// decomposition) until the objective settles.
inline SolveResult solve(const Scenario& s, const SolverParams& params = {}) {
    s.validate();
    params.validate();
    const auto t_start = std::chrono::steady_clock::now();

    SolveResult r;
    r.allocation = equal_split(s);
    double current = objective(r.allocation, s);
    r.initial_objective = current;
    const double grad_floor = 1e-9 * s.total_bandwidth_hz;

    for (std::size_t round = 0; round < params.ao_max_iters; ++round) {
        InnerTrace inner;

        auto t0 = std::chrono::steady_clock::now();
        const QotBandwidthObjective bw(s, r.allocation.power, grad_floor);
        AgpResult agp = agp_solve(bw, params.agp, r.allocation.bandwidth);
        r.agp_time_s += detail::seconds_since(t0);
        r.agp_iterations += agp.iterations;
        r.allocation.bandwidth = std::move(agp.bandwidth);
        inner.agp = std::move(agp.trace);

        t0 = std::chrono::steady_clock::now();
        DualResult dual = dual_solve(r.allocation.bandwidth, s, params.dual);
        r.dual_time_s += detail::seconds_since(t0);
        r.dual_iterations += dual.iterations;
        r.allocation.power = std::move(dual.power);
        inner.dual = std::move(dual.trace);

        const double next = objective(r.allocation, s);
        r.ao_trace.push_back(next);
        r.inner_traces.push_back(std::move(inner));
        const bool settled = std::abs(current - next) <= params.ao_rel_tol * std::abs(next);
        current = next;
        if (settled) {
            r.converged = true;
            break;
        }
    }
    summarize(r, s);
    r.wall_time_s = detail::seconds_since(t_start);
    return r;
}

}  // namespace qot
