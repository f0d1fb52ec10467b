// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/model.hpp"
#include "qot/simplex.hpp"

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace qot {

struct AgpParams {
    double step_size = 1e4;
    std::size_t max_iters = 1000;
    double rel_tol = 1e-9;
    bool restart = true;
    // Backtracking on non-accelerated steps plus a secant estimate of the
    // initial step. Off reproduces the fixed-step iteration.
    bool adaptive_step = true;
    // Iterates stay at or above this bandwidth (Hz); unset means
    // 1e-9 * B_total. Zero disables the floor on iterates. The gradient is
    // always evaluated at bandwidth >= the floor.
    std::optional<double> min_bandwidth_floor;

    double floor_for(double total_bandwidth) const {
        return min_bandwidth_floor.value_or(1e-9 * total_bandwidth);
    }
};

/// d/du of u * log2(1 + p g / (N0 u)). Zero when p = 0.
inline double rate_bandwidth_derivative(double u, double p, double g, double noise_density) {
    if (p <= 0.0) return 0.0;
    const double snr = p * g / (noise_density * u);
    return (std::log1p(snr) - snr / (1.0 + snr)) / kLn2;
}

/// Gradient of the average perception error with respect to bandwidth, power
/// held fixed. Bandwidth below `floor` is raised to it before evaluation.
inline void gradient_bandwidth(const Matrix& bandwidth, const Matrix& power, const Scenario& s,
                               Matrix& grad, double floor = 0.0) {
    const Eigen::Index nk = bandwidth.rows();
    const Eigen::Index nn = bandwidth.cols();
    const double n0 = s.noise_density_w_per_hz;
    const double slots = static_cast<double>(s.num_slots);
    grad.resize(nk, nn);
    thread_local std::vector<double> snr, log_term;
    snr.resize(static_cast<std::size_t>(nn));
    log_term.resize(static_cast<std::size_t>(nn));
    for (Eigen::Index k = 0; k < nk; ++k) {
        const auto& cav = s.cavs[static_cast<std::size_t>(k)];
        const double scale = s.slot_duration_s / (slots * cav.sample_size_bits);
        double samples = 0.0;
        for (Eigen::Index n = 0; n < nn; ++n) {
            const auto i = static_cast<std::size_t>(n);
            const double u = std::max(bandwidth(k, n), floor);
            if (u > 0.0 && power(k, n) > 0.0) {
                snr[i] = power(k, n) * s.reduced_gains(k, n) / (n0 * u);
                log_term[i] = std::log1p(snr[i]);
                samples += u * log_term[i];
            } else {
                snr[i] = log_term[i] = 0.0;
            }
        }
        samples *= scale / kLn2;
        if (!(samples > 0.0))
            throw DomainError("vehicle " + std::to_string(k) + " has zero rate; gradient undefined");
        const double weight = -cav.curve.amplitude * cav.curve.exponent * scale /
                              static_cast<double>(nk) * std::pow(samples, -cav.curve.exponent - 1.0);
        for (Eigen::Index n = 0; n < nn; ++n) {
            const auto i = static_cast<std::size_t>(n);
            grad(k, n) = weight * (log_term[i] - snr[i] / (1.0 + snr[i])) / kLn2;
        }
    }
}

inline Matrix gradient_bandwidth(const Matrix& bandwidth, const Matrix& power, const Scenario& s,
                                 double floor = 0.0) {
    Matrix g;
    gradient_bandwidth(bandwidth, power, s, g, floor);
    return g;
}

/// What the AGP iteration minimizes over the bandwidth simplex.
template <class F>
concept BandwidthObjective = requires(const F& f, const Matrix& u, Matrix& g) {
    { f.value(u) } -> std::convertible_to<double>;
    f.gradient(u, g);
    { f.scenario() } -> std::convertible_to<const Scenario&>;
};

/// Average perception error at fixed power.
class QotBandwidthObjective {
public:
    QotBandwidthObjective(const Scenario& s, const Matrix& power, double grad_floor)
        : scenario_(&s), power_(&power), floor_(grad_floor) {
        for (Eigen::Index k = 0; k < power.rows(); ++k) {
            bool usable = false;
            for (Eigen::Index n = 0; n < power.cols(); ++n)
                usable = usable || (power(k, n) > 0.0);
            if (!usable)
                throw DomainError("vehicle " + std::to_string(k) + " has no slot with positive power");
        }
    }

    double value(const Matrix& u) const { return objective(u, *power_, *scenario_); }
    void gradient(const Matrix& u, Matrix& g) const { gradient_bandwidth(u, *power_, *scenario_, g, floor_); }
    const Scenario& scenario() const { return *scenario_; }

private:
    const Scenario* scenario_;
    const Matrix* power_;
    double floor_;
};

/// Negative total throughput -sum_k sum_n T R_{k,n} / N in bits.
class ThroughputBandwidthObjective {
public:
    ThroughputBandwidthObjective(const Scenario& s, const Matrix& power, double grad_floor)
        : scenario_(&s), power_(&power), floor_(grad_floor) {}

    double value(const Matrix& u) const {
        const auto& s = *scenario_;
        double total = 0.0;
        for (Eigen::Index k = 0; k < u.rows(); ++k)
            for (Eigen::Index n = 0; n < u.cols(); ++n)
                total += achievable_rate(u(k, n), (*power_)(k, n), s.reduced_gains(k, n), s.noise_density_w_per_hz);
        return -s.slot_duration_s * total / static_cast<double>(s.num_slots);
    }

    void gradient(const Matrix& u, Matrix& g) const {
        const auto& s = *scenario_;
        const double scale = -s.slot_duration_s / static_cast<double>(s.num_slots);
        g.resize(u.rows(), u.cols());
        for (Eigen::Index k = 0; k < u.rows(); ++k)
            for (Eigen::Index n = 0; n < u.cols(); ++n)
                g(k, n) = scale * rate_bandwidth_derivative(std::max(u(k, n), floor_), (*power_)(k, n),
                                                            s.reduced_gains(k, n), s.noise_density_w_per_hz);
    }

    const Scenario& scenario() const { return *scenario_; }

private:
    const Scenario* scenario_;
    const Matrix* power_;
    double floor_;
};

/// c_i = (1 + sqrt(1 + 4 c_{i-1}^2)) / 2.
inline double momentum_coefficient(double c_prev) {
    return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * c_prev * c_prev));
}

struct AgpState {
    Matrix current;         // U^[i]
    Matrix previous;        // U^[i-1]
    Matrix momentum_point;  // Q^[i]
    double momentum_coeff = 1.0;
    double prev_coeff = 1.0;
    double step_size = 1e4;
    std::size_t iter = 0;
    double objective = kInfinity;
    std::size_t consecutive_restarts = 0;
    std::size_t restarts = 0;
};

struct AgpResult {
    Matrix bandwidth;
    std::vector<double> trace;
    std::size_t iterations = 0;
    std::size_t restarts = 0;
    double final_step_size = 0.0;
    bool converged = false;
};

namespace detail {

// Projected gradient step from the current iterate. With adaptive steps the
// step is halved until the Armijo condition holds along the projection arc
// and doubled for the next call when the first trial is accepted.
template <BandwidthObjective F>
void plain_step(AgpState& st, const F& f, const AgpParams& params, double budget, double floor,
                Matrix& grad, Matrix& trial, Matrix& candidate, ProjectionWorkspace& ws) {
    constexpr double kArmijo = 1e-4;
    f.gradient(st.current, grad);
    double value = kInfinity;
    int halvings = 0;
    for (; halvings < 64; ++halvings) {
        trial = st.current - st.step_size * grad;
        project_matrix_floored(trial, budget, floor, candidate, ws);
        value = f.value(candidate);
        if (!params.adaptive_step) break;
        const double decrease = grad.cwiseProduct(candidate - st.current).sum();
        if (value <= st.objective + kArmijo * decrease) break;
        st.step_size *= 0.5;
    }
    if (params.adaptive_step) {
        if (halvings == 0) st.step_size *= 2.0;
        if (!(value <= st.objective)) {
            candidate = st.current;
            value = st.objective;
        }
    }
    st.previous.swap(st.current);
    st.current.swap(candidate);
    st.momentum_point = st.previous;
    st.objective = value;
}

}  // namespace detail

/// One accelerated projected-gradient iteration. With restart enabled, an
/// accelerated step that raises the objective is discarded and replaced by a
/// plain projected step with momentum reset.
template <BandwidthObjective F>
void agp_step(AgpState& st, const F& f, const AgpParams& params) {
    const Scenario& s = f.scenario();
    const double budget = s.total_bandwidth_hz;
    const double floor = params.floor_for(budget);
    thread_local ProjectionWorkspace ws;
    thread_local Matrix grad, trial, candidate;

    const double c_new = momentum_coefficient(st.prev_coeff);
    const double beta = (st.prev_coeff - 1.0) / c_new;
    ++st.iter;

    if (beta == 0.0) {
        detail::plain_step(st, f, params, budget, floor, grad, trial, candidate, ws);
        st.prev_coeff = st.momentum_coeff = c_new;
        return;
    }

    st.momentum_point = st.current + beta * (st.current - st.previous);
    f.gradient(st.momentum_point, grad);
    trial = st.momentum_point - st.step_size * grad;
    project_matrix_floored(trial, budget, floor, candidate, ws);
    const double value = f.value(candidate);

    if (params.restart && !(value <= st.objective)) {
        ++st.restarts;
        if (++st.consecutive_restarts > 10) {
            st.step_size *= 0.5;
            st.consecutive_restarts = 0;
        }
        detail::plain_step(st, f, params, budget, floor, grad, trial, candidate, ws);
        st.prev_coeff = st.momentum_coeff = momentum_coefficient(1.0);
        return;
    }
    st.consecutive_restarts = 0;
    st.previous.swap(st.current);
    st.current.swap(candidate);
    st.objective = value;
    st.prev_coeff = st.momentum_coeff = c_new;
}

namespace detail {

// Step size 1/L from a secant estimate of the gradient Lipschitz constant.
template <BandwidthObjective F>
double estimate_step(const F& f, const Matrix& u0, double budget, double floor, double fallback) {
    Matrix g0, g1, u1;
    f.gradient(u0, g0);
    const double gmax = g0.cwiseAbs().maxCoeff();
    if (!(gmax > 0.0) || !std::isfinite(gmax)) return fallback;
    ProjectionWorkspace ws;
    project_matrix_floored(u0 - (1e-3 * budget / gmax) * g0, budget, floor, u1, ws);
    const double du = (u1 - u0).norm();
    if (!(du > 0.0)) return fallback;
    f.gradient(u1, g1);
    const double lipschitz = (g1 - g0).norm() / du;
    if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) return 1e-3 * budget / gmax;
    return 1.0 / lipschitz;
}

}  // namespace detail

/// Runs agp_step until the objective changes by less than rel_tol
/// (relative) across a five-iteration window, or max_iters.
template <BandwidthObjective F>
AgpResult agp_solve(const F& f, const AgpParams& params, const std::optional<Matrix>& warm_start = std::nullopt) {
    const Scenario& s = f.scenario();
    const auto nk = static_cast<Eigen::Index>(s.num_cavs());
    const auto nn = static_cast<Eigen::Index>(s.num_slots);
    const double budget = s.total_bandwidth_hz;
    const double floor = params.floor_for(budget);

    AgpState st;
    Matrix start = warm_start ? *warm_start : Matrix::Constant(nk, nn, budget / static_cast<double>(nk));
    if (start.rows() != nk || start.cols() != nn) throw DomainError("warm start has the wrong shape");
    {
        ProjectionWorkspace ws;
        project_matrix_floored(start, budget, floor, st.current, ws);
    }
    st.previous = st.current;
    st.momentum_point = st.current;
    st.objective = f.value(st.current);
    st.step_size = params.adaptive_step ? detail::estimate_step(f, st.current, budget, floor, params.step_size)
                                        : params.step_size;

    AgpResult out;
    out.trace.reserve(params.max_iters + 1);
    out.trace.push_back(st.objective);
    for (std::size_t i = 0; i < params.max_iters; ++i) {
        agp_step(st, f, params);
        out.trace.push_back(st.objective);
        const std::size_t m = out.trace.size() - 1;
        if (m >= 5 && std::abs(out.trace[m - 5] - out.trace[m]) <= params.rel_tol * std::abs(out.trace[m])) {
            out.converged = true;
            break;
        }
    }
    out.bandwidth = std::move(st.current);
    out.iterations = st.iter;
    out.restarts = st.restarts;
    out.final_step_size = st.step_size;
    return out;
}

}  // namespace qot
