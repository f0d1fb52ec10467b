// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace qot {

/// Water-filling over the slots of one vehicle.
///
/// Slot n receives p_n(nu) = max(0, alpha_n * nu - beta_n), where nu is the
/// inverse water level. In slot n the resulting log-rate term is
/// weight_n * log2(alpha_n * nu / beta_n). Slots are sorted by their
/// activation level r_n = beta_n / alpha_n, so total power and the weighted
/// rate are piecewise closed-form in nu and can be inverted exactly.
class WaterfillTable {
public:
    WaterfillTable() = default;

    /// Slots with alpha <= 0 never receive power and are dropped.
    WaterfillTable(const std::vector<double>& alpha, const std::vector<double>& beta,
                   const std::vector<double>& weight)
        : num_slots_(alpha.size()) {
        for (std::size_t n = 0; n < alpha.size(); ++n)
            if (alpha[n] > 0.0) slots_.push_back(n);
        std::sort(slots_.begin(), slots_.end(), [&](std::size_t i, std::size_t j) {
            const double ri = beta[i] / alpha[i], rj = beta[j] / alpha[j];
            return ri < rj || (ri == rj && i < j);
        });
        const std::size_t m = slots_.size();
        alpha_.resize(m);
        beta_.resize(m);
        level_.resize(m);
        weight_.resize(m);
        cum_alpha_.assign(m + 1, 0.0);
        cum_beta_.assign(m + 1, 0.0);
        cum_weight_.assign(m + 1, 0.0);
        cum_weight_log_.assign(m + 1, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t n = slots_[j];
            alpha_[j] = alpha[n];
            beta_[j] = beta[n];
            weight_[j] = weight[n];
            level_[j] = beta[n] / alpha[n];
            cum_alpha_[j + 1] = cum_alpha_[j] + alpha_[j];
            cum_beta_[j + 1] = cum_beta_[j] + beta_[j];
            cum_weight_[j + 1] = cum_weight_[j] + weight_[j];
            cum_weight_log_[j + 1] = cum_weight_log_[j] + weight_[j] * std::log2(level_[j]);
        }
    }

    bool empty() const { return slots_.empty(); }
    std::size_t num_slots() const { return num_slots_; }

    /// Level below which no slot is active.
    double min_level() const { return level_.front(); }

    /// Total power sum_n p_n(nu).
    double total_power(double nu) const {
        const std::size_t m = active_count(nu);
        return cum_alpha_[m] * nu - cum_beta_[m];
    }

    /// sum_n weight_n * log2(1 + p_n(nu) / beta_n).
    double weighted_rate(double nu) const {
        const std::size_t m = active_count(nu);
        if (m == 0) return 0.0;
        return cum_weight_[m] * std::log2(nu) - cum_weight_log_[m];
    }

    /// d(weighted_rate)/d(total_power) at nu.
    double marginal_rate(double nu) const {
        const std::size_t m = active_count(nu);
        if (m == 0) return kInfinity;
        return cum_weight_[m] / (kLn2 * nu * cum_alpha_[m]);
    }

    /// Exact nu with total_power(nu) = target (target > 0).
    double level_for_power(double target) const {
        if (empty()) throw DomainError("no usable slot for water-filling");
        if (!(target > 0.0)) return min_level();
        // Power at breakpoint j (first j slots active) is
        // cum_alpha[j] * level[j] - cum_beta[j]; nondecreasing in j.
        std::size_t lo = 1, hi = level_.size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cum_alpha_[mid] * level_[mid] - cum_beta_[mid] >= target)
                hi = mid;
            else
                lo = mid + 1;
        }
        return (target + cum_beta_[lo]) / cum_alpha_[lo];
    }

    /// Per-slot powers in original slot order.
    std::vector<double> profile(double nu) const {
        std::vector<double> p(num_slots_, 0.0);
        for (std::size_t j = 0; j < slots_.size(); ++j)
            p[slots_[j]] = std::max(0.0, alpha_[j] * nu - beta_[j]);
        return p;
    }

private:
    std::size_t active_count(double nu) const {
        return static_cast<std::size_t>(std::upper_bound(level_.begin(), level_.end(), nu) - level_.begin());
    }

    std::size_t num_slots_ = 0;
    std::vector<std::size_t> slots_;
    std::vector<double> alpha_, beta_, level_, weight_;
    std::vector<double> cum_alpha_, cum_beta_, cum_weight_, cum_weight_log_;
};

/// Water-filling table of vehicle k's sample count at fixed bandwidth.
inline WaterfillTable sample_waterfill(const Matrix& bandwidth, const Scenario& s, std::size_t k) {
    const auto row = static_cast<Eigen::Index>(k);
    const auto nn = static_cast<std::size_t>(s.num_slots);
    const double per_hz = s.slot_duration_s / (static_cast<double>(s.num_slots) * s.cavs[k].sample_size_bits);
    std::vector<double> alpha(nn), beta(nn), weight(nn);
    for (std::size_t n = 0; n < nn; ++n) {
        const double u = bandwidth(row, static_cast<Eigen::Index>(n));
        weight[n] = per_hz * u;
        alpha[n] = weight[n] / kLn2;
        beta[n] = s.noise_density_w_per_hz * u / s.reduced_gains(row, static_cast<Eigen::Index>(n));
    }
    return WaterfillTable(alpha, beta, weight);
}

/// p_n = max(0, T u_n / (mu N D_k ln 2) - N0 u_n / g_n); zero where u_n = 0.
inline Vector power_profile(double mu, const Vector& bandwidth, const Vector& gains, const Scenario& s, std::size_t k) {
    if (!(mu > 0.0)) throw DomainError("water level must be positive");
    const double coef = s.slot_duration_s /
                        (mu * static_cast<double>(s.num_slots) * s.cavs[k].sample_size_bits * kLn2);
    Vector p(bandwidth.size());
    for (Eigen::Index n = 0; n < bandwidth.size(); ++n) {
        const double u = bandwidth(n);
        p(n) = u > 0.0 ? std::max(0.0, coef * u - s.noise_density_w_per_hz * u / gains(n)) : 0.0;
    }
    return p;
}

/// Water level mu at which vehicle k's slots sum to `target` watts. A zero
/// target returns the smallest level at which every slot is off.
inline double solve_water_level(const Vector& bandwidth, const Vector& gains, const Scenario& s, std::size_t k,
                                double target) {
    if (!(target >= 0.0)) throw DomainError("target power must be nonnegative");
    Matrix u_row = bandwidth.transpose();
    Scenario one = s;
    one.cavs = {s.cavs[k]};
    one.reduced_gains = gains.transpose();
    const WaterfillTable table = sample_waterfill(u_row, one, 0);
    if (table.empty()) {
        if (target > 0.0) throw DomainError("vehicle " + std::to_string(k) + " has no bandwidth to carry power");
        return kInfinity;
    }
    return 1.0 / table.level_for_power(target);
}

/// How the per-vehicle average power t_k is chosen.
enum class SlackSearch {
    // Bisection on the analytic derivative of the subproblem objective.
    Stationarity,
    // Golden-section search on the subproblem objective.
    Golden,
    // Bisection on a central-difference derivative.
    FiniteDifferenceBisection,
};

struct SubproblemResult {
    Vector power_row;
    double slack = 0.0;  // t_k, average power
    double sub_objective = 0.0;
    double water_level = kInfinity;  // mu
};

namespace detail {

// Minimizes (a/K) v^(-b) + lambda t over t in [0, cap] where v(t) is the
// water-filled sample count at average power t.
inline SubproblemResult minimize_slack(const WaterfillTable& table, const Scenario& s, std::size_t k, double lambda,
                                       SlackSearch search, double tol) {
    const auto& cav = s.cavs[k];
    const double slots = static_cast<double>(s.num_slots);
    const double weight = cav.curve.amplitude / static_cast<double>(s.num_cavs());
    const double cap = cav.power_cap_watts;

    auto phi = [&](double t) {
        if (!(t > 0.0)) return kInfinity;
        const double v = table.weighted_rate(table.level_for_power(slots * t));
        return weight * std::pow(v, -cav.curve.exponent) + lambda * t;
    };

    double t_star = cap;
    if (lambda > 0.0) {
        switch (search) {
        case SlackSearch::Stationarity: {
            // phi'(nu) = lambda - (a b / K) v^(-b-1) dv/dt, increasing in nu.
            auto dphi = [&](double nu) {
                const double v = table.weighted_rate(nu);
                if (!(v > 0.0)) return -kInfinity;
                return lambda - weight * cav.curve.exponent * std::pow(v, -cav.curve.exponent - 1.0) *
                                    table.marginal_rate(nu) * slots;
            };
            const double nu_cap = table.level_for_power(slots * cap);
            if (dphi(nu_cap) > 0.0) {
                double lo = table.min_level(), hi = nu_cap;
                for (int it = 0; it < 200 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (dphi(mid) > 0.0 ? hi : lo) = mid;
                }
                t_star = std::min(cap, table.total_power(0.5 * (lo + hi)) / slots);
            }
            break;
        }
        case SlackSearch::Golden: {
            const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
            double a = 0.0, b = cap;
            double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
            double fc = phi(c), fd = phi(d);
            while (b - a > tol * cap) {
                if (fc <= fd) {
                    b = d; d = c; fd = fc;
                    c = b - inv_phi * (b - a);
                    fc = phi(c);
                } else {
                    a = c; c = d; fc = fd;
                    d = a + inv_phi * (b - a);
                    fd = phi(d);
                }
            }
            t_star = 0.5 * (a + b);
            if (phi(cap) <= phi(t_star)) t_star = cap;
            break;
        }
        case SlackSearch::FiniteDifferenceBisection: {
            double a = 0.0, b = cap;
            while (b - a > tol * cap) {
                const double mid = 0.5 * (a + b);
                const double h = std::min(0.25 * (b - a), 1e-6 * cap);
                if (phi(mid + h) - phi(mid - h) > 0.0) b = mid; else a = mid;
            }
            t_star = 0.5 * (a + b);
            if (phi(cap) <= phi(t_star)) t_star = cap;
            break;
        }
        }
    }

    SubproblemResult r;
    const double nu = table.level_for_power(slots * t_star);
    const auto p = table.profile(nu);
    r.power_row = Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
    r.slack = r.power_row.sum() / slots;
    r.sub_objective = phi(r.slack);
    r.water_level = 1.0 / nu;
    return r;
}

}  // namespace detail

/// Per-vehicle problem of the dual decomposition at multiplier lambda: pick
/// the average power t_k in [0, P_k] and water-fill it over the slots.
inline SubproblemResult solve_subproblem(std::size_t k, double lambda, const Matrix& bandwidth, const Scenario& s,
                                         SlackSearch search = SlackSearch::Stationarity, double tol = 1e-8) {
    if (!(lambda >= 0.0)) throw DomainError("multiplier must be nonnegative");
    const WaterfillTable table = sample_waterfill(bandwidth, s, k);
    if (table.empty()) throw DomainError("vehicle " + std::to_string(k) + " has no usable slot");
    return detail::minimize_slack(table, s, k, lambda, search, tol);
}

struct DualParams {
    double xi = 1e-3;
    std::size_t max_iters = 10000;
    // Convergence when |avg total power - P_total| <= tol_power * P_total.
    double tol_power = 1e-12;
    // Once the multiplier is bracketed, bisect instead of stepping; before
    // that, double xi after 10 steps without a sign change.
    bool safeguarded = true;
    SlackSearch slack_search = SlackSearch::Stationarity;
    double slack_tol = 1e-8;
};

struct DualIterate {
    double lambda;
    double violation;  // W
};

struct DualResult {
    Matrix power;
    double lambda = 0.0;
    Vector slack;        // t_k
    Vector water_level;  // mu_k
    std::vector<DualIterate> trace;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Power allocation at fixed bandwidth by dual decomposition of the total
/// power constraint.
inline DualResult dual_solve(const Matrix& bandwidth, const Scenario& s, const DualParams& params = {}) {
    const std::size_t nk = s.num_cavs();
    std::vector<WaterfillTable> tables;
    tables.reserve(nk);
    for (std::size_t k = 0; k < nk; ++k) {
        tables.push_back(sample_waterfill(bandwidth, s, k));
        if (tables.back().empty()) throw DomainError("vehicle " + std::to_string(k) + " has no usable slot");
    }

    std::vector<SubproblemResult> sub(nk);
    auto evaluate = [&](double lambda) {
        double avg = 0.0;
        for (std::size_t k = 0; k < nk; ++k) {
            sub[k] = detail::minimize_slack(tables[k], s, k, lambda, params.slack_search, params.slack_tol);
            avg += sub[k].slack;
        }
        return avg - s.total_power_watts;
    };

    DualResult out;
    const double tol = params.tol_power * s.total_power_watts;
    double lambda = 0.0;
    double xi = params.xi;
    double lo = 0.0, hi = kInfinity;  // violation > 0 at lo, < 0 at hi
    std::size_t same_sign = 0;
    double best_abs = kInfinity, best_lambda = 0.0;

    for (std::size_t it = 0; it < params.max_iters; ++it) {
        const double viol = evaluate(lambda);
        out.trace.push_back({lambda, viol});
        ++out.iterations;
        if (std::abs(viol) < best_abs && viol <= tol) {
            best_abs = std::abs(viol);
            best_lambda = lambda;
        }
        if (std::abs(viol) <= tol || (lambda == 0.0 && viol <= 0.0)) {
            out.converged = true;
            break;
        }
        if (!params.safeguarded) {
            lambda = std::max(0.0, lambda + xi * viol);
            continue;
        }
        if (viol > 0.0) lo = std::max(lo, lambda); else hi = std::min(hi, lambda);
        if (std::isfinite(hi)) {
            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
                // Multiplier resolved to machine precision; take the
                // feasible side.
                lambda = hi;
                out.trace.push_back({lambda, evaluate(lambda)});
                out.converged = true;
                break;
            }
            lambda = 0.5 * (lo + hi);
        } else {
            if (++same_sign >= 10) {
                xi *= 2.0;
                same_sign = 0;
            }
            lambda = std::max(0.0, lambda + xi * viol);
        }
    }
    if (!out.converged && std::isfinite(best_abs) && best_lambda != out.trace.back().lambda) evaluate(best_lambda);

    out.power.resize(static_cast<Eigen::Index>(nk), static_cast<Eigen::Index>(s.num_slots));
    out.slack.resize(static_cast<Eigen::Index>(nk));
    out.water_level.resize(static_cast<Eigen::Index>(nk));
    for (std::size_t k = 0; k < nk; ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        out.power.row(row) = sub[k].power_row.transpose();
        out.slack(row) = sub[k].slack;
        out.water_level(row) = sub[k].water_level;
    }
    out.lambda = out.converged || !std::isfinite(best_abs) ? out.trace.back().lambda : best_lambda;
    return out;
}

}  // namespace qot
