// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/bandwidth_agp.hpp"
#include "qot/channel.hpp"
#include "qot/model.hpp"
#include "qot/power_dual.hpp"
#include "qot/solver.hpp"

#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace qot {

enum class SchemeId { EqualSplit, ThroughputMax, QotPowerOnly, QotStaticChannel, Proposed };

inline constexpr std::array<SchemeId, 5> kAllSchemes = {SchemeId::EqualSplit, SchemeId::ThroughputMax,
                                                        SchemeId::QotPowerOnly, SchemeId::QotStaticChannel,
                                                        SchemeId::Proposed};

inline std::string_view scheme_name(SchemeId id) {
    switch (id) {
    case SchemeId::EqualSplit: return "equal";
    case SchemeId::ThroughputMax: return "throughput";
    case SchemeId::QotPowerOnly: return "qot-power";
    case SchemeId::QotStaticChannel: return "qot-static";
    case SchemeId::Proposed: return "proposed";
    }
    return "unknown";
}

/// Accepts the canonical names and scheme1..scheme4.
inline std::optional<SchemeId> parse_scheme(std::string_view name) {
    for (SchemeId id : kAllSchemes)
        if (name == scheme_name(id)) return id;
    if (name == "scheme1") return SchemeId::EqualSplit;
    if (name == "scheme2") return SchemeId::ThroughputMax;
    if (name == "scheme3") return SchemeId::QotPowerOnly;
    if (name == "scheme4") return SchemeId::QotStaticChannel;
    return std::nullopt;
}

inline Allocation scheme1_equal(const Scenario& s) {
    s.validate();
    return equal_split(s);
}

/// Total throughput sum_k sum_n T R_{k,n} / N in bits.
inline double total_throughput(const Allocation& a, const Scenario& s) {
    const ThroughputBandwidthObjective f(s, a.power, 0.0);
    return -f.value(a.bandwidth);
}

/// Sum-throughput power allocation at fixed bandwidth: one common water
/// level across vehicles, each capped at its own budget, with the common
/// level set so the total budget is met.
inline Matrix throughput_power(const Matrix& bandwidth, const Scenario& s) {
    const std::size_t nk = s.num_cavs();
    const auto nn = static_cast<std::size_t>(s.num_slots);
    const double slots = static_cast<double>(s.num_slots);
    std::vector<WaterfillTable> tables;
    std::vector<double> level_cap(nk);
    for (std::size_t k = 0; k < nk; ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        std::vector<double> alpha(nn), beta(nn), weight(nn);
        for (std::size_t n = 0; n < nn; ++n) {
            const double u = bandwidth(row, static_cast<Eigen::Index>(n));
            weight[n] = s.slot_duration_s * u / slots;
            alpha[n] = s.slot_duration_s * u / kLn2;
            beta[n] = s.noise_density_w_per_hz * u / s.reduced_gains(row, static_cast<Eigen::Index>(n));
        }
        tables.emplace_back(alpha, beta, weight);
        if (tables.back().empty()) throw DomainError("vehicle " + std::to_string(k) + " has no usable slot");
        level_cap[k] = tables.back().level_for_power(slots * s.cavs[k].power_cap_watts);
    }
    auto total_at = [&](double nu) {
        double total = 0.0;
        for (std::size_t k = 0; k < nk; ++k) total += tables[k].total_power(std::min(nu, level_cap[k]));
        return total;
    };

    const double budget = slots * s.total_power_watts;
    double nu = *std::max_element(level_cap.begin(), level_cap.end());
    if (total_at(nu) > budget) {
        double lo = tables[0].min_level();
        for (const auto& t : tables) lo = std::min(lo, t.min_level());
        double hi = nu;
        for (int it = 0; it < 300 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (total_at(mid) > budget ? hi : lo) = mid;
        }
        nu = lo;
    }
    Matrix power(static_cast<Eigen::Index>(nk), static_cast<Eigen::Index>(nn));
    for (std::size_t k = 0; k < nk; ++k) {
        const auto p = tables[k].profile(std::min(nu, level_cap[k]));
        for (std::size_t n = 0; n < nn; ++n) power(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = p[n];
    }
    return power;
}

/// Joint bandwidth and power allocation maximizing total throughput, by the
/// same alternating scheme with the learning curves removed.
inline Allocation scheme2_throughput(const Scenario& s, const SolverParams& params = {}) {
    s.validate();
    params.validate();
    Allocation a = equal_split(s);
    const double grad_floor = 1e-9 * s.total_bandwidth_hz;
    double current = -total_throughput(a, s);
    for (std::size_t round = 0; round < params.ao_max_iters; ++round) {
        const ThroughputBandwidthObjective f(s, a.power, grad_floor);
        a.bandwidth = agp_solve(f, params.agp, a.bandwidth).bandwidth;
        a.power = throughput_power(a.bandwidth, s);
        const double next = -total_throughput(a, s);
        const bool settled = std::abs(current - next) <= params.ao_rel_tol * std::abs(next);
        current = next;
        if (settled) break;
    }
    return a;
}

/// Equal bandwidth, learning-curve-aware power.
inline Allocation scheme3_qot_power_only(const Scenario& s, const SolverParams& params = {}) {
    s.validate();
    params.validate();
    Allocation a = equal_split(s);
    a.power = dual_solve(a.bandwidth, s, params.dual).power;
    return a;
}

/// Solves the problem on time-averaged gains as a single slot and repeats
/// that allocation in every slot.
inline Allocation scheme4_static_channel(const Scenario& s, const SolverParams& params = {}) {
    s.validate();
    Scenario surrogate = s;
    surrogate.num_slots = 1;
    surrogate.reduced_gains = average_gains(s.reduced_gains);
    const SolveResult r = solve(surrogate, params);
    const auto nn = static_cast<Eigen::Index>(s.num_slots);
    Allocation a{r.allocation.bandwidth.replicate(1, nn), r.allocation.power.replicate(1, nn)};
    // Replication preserves every average, so the caps still hold; clip
    // anyway against rounding.
    for (Eigen::Index k = 0; k < a.power.rows(); ++k) {
        const double cap = s.cavs[static_cast<std::size_t>(k)].power_cap_watts;
        const double avg = a.power.row(k).mean();
        if (avg > cap) a.power.row(k) *= cap / avg;
    }
    const double total = a.power.sum() / static_cast<double>(s.num_slots);
    if (total > s.total_power_watts) a.power *= s.total_power_watts / total;
    return a;
}

struct SchemeOutcome {
    SolveResult result;
    SchemeId scheme = SchemeId::Proposed;
};

/// Runs any scheme and evaluates it on the true scenario.
inline SchemeOutcome run_scheme(SchemeId id, const Scenario& s, const SolverParams& params = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    SchemeOutcome out;
    out.scheme = id;
    switch (id) {
    case SchemeId::Proposed: out.result = solve(s, params); break;
    case SchemeId::EqualSplit: out.result.allocation = scheme1_equal(s); break;
    case SchemeId::ThroughputMax: out.result.allocation = scheme2_throughput(s, params); break;
    case SchemeId::QotPowerOnly: out.result.allocation = scheme3_qot_power_only(s, params); break;
    case SchemeId::QotStaticChannel: out.result.allocation = scheme4_static_channel(s, params); break;
    }
    if (id != SchemeId::Proposed) {
        summarize(out.result, s);
        out.result.converged = true;
    }
    out.result.wall_time_s = detail::seconds_since(t0);
    return out;
}

}  // namespace qot
