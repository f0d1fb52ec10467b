// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/channel.hpp"
#include "qot/model.hpp"
#include "qot/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

namespace qot {

// Verification solver for small instances: a primal log-barrier interior
// point method with dense Newton steps on (bandwidth, power) jointly. It has
// its own derivatives and never touches the projection, AGP or
// water-filling code; only the objective definition is shared.
namespace reference_detail {

class BarrierProblem {
public:
    explicit BarrierProblem(const Scenario& s)
        : s_(&s), nk_(static_cast<Eigen::Index>(s.num_cavs())), nn_(static_cast<Eigen::Index>(s.num_slots)) {
        const double slots = static_cast<double>(s.num_slots);
        row_caps_.resize(nk_);
        for (Eigen::Index k = 0; k < nk_; ++k)
            row_caps_(k) = slots * s.cavs[static_cast<std::size_t>(k)].power_cap_watts / s.total_power_watts;
        total_cap_ = slots;
        num_ineq_ = 2 * nk_ * nn_ + nk_ + 1;
        // Basis of directions keeping sum_k x_{k,n} = 1: move bandwidth from
        // the last vehicle to vehicle k in slot n, or move any power.
        basis_.setZero(dim(), dim() - nn_);
        Eigen::Index col = 0;
        for (Eigen::Index k = 0; k + 1 < nk_; ++k)
            for (Eigen::Index n = 0; n < nn_; ++n, ++col) {
                basis_(xi(k, n), col) = 1.0;
                basis_(xi(nk_ - 1, n), col) = -1.0;
            }
        for (Eigen::Index i = nk_ * nn_; i < dim(); ++i, ++col) basis_(i, col) = 1.0;
    }

    Eigen::Index dim() const { return 2 * nk_ * nn_; }
    Eigen::Index num_inequalities() const { return num_ineq_; }
    const Matrix& basis() const { return basis_; }

    // Layout: x (bandwidth / B_total) then y (power / P_total), row-major by
    // vehicle.
    Eigen::Index xi(Eigen::Index k, Eigen::Index n) const { return k * nn_ + n; }
    Eigen::Index yi(Eigen::Index k, Eigen::Index n) const { return nk_ * nn_ + k * nn_ + n; }

    Allocation to_allocation(const Vector& z) const {
        Allocation a{Matrix(nk_, nn_), Matrix(nk_, nn_)};
        for (Eigen::Index k = 0; k < nk_; ++k)
            for (Eigen::Index n = 0; n < nn_; ++n) {
                a.bandwidth(k, n) = s_->total_bandwidth_hz * z(xi(k, n));
                a.power(k, n) = s_->total_power_watts * z(yi(k, n));
            }
        return a;
    }

    bool strictly_feasible(const Vector& z) const {
        if ((z.array() <= 0.0).any()) return false;
        double total = 0.0;
        for (Eigen::Index k = 0; k < nk_; ++k) {
            const double row = z.segment(yi(k, 0), nn_).sum();
            if (!(row < row_caps_(k))) return false;
            total += row;
        }
        return total < total_cap_;
    }

    double objective(const Vector& z) const {
        const Allocation a = to_allocation(z);
        return qot::objective(a, *s_);
    }

    // t * f(z) - sum of log slacks; +inf outside the strict interior.
    double barrier(const Vector& z, double t) const {
        if (!strictly_feasible(z)) return kInfinity;
        const double f = objective(z);
        if (!std::isfinite(f)) return kInfinity;
        double phi = -z.array().log().sum();
        double total = 0.0;
        for (Eigen::Index k = 0; k < nk_; ++k) {
            const double row = z.segment(yi(k, 0), nn_).sum();
            phi -= std::log(row_caps_(k) - row);
            total += row;
        }
        phi -= std::log(total_cap_ - total);
        return t * f + phi;
    }

    // Gradient and Hessian of the barrier function.
    void derivatives(const Vector& z, double t, Vector& grad, Matrix& hess) const {
        const Scenario& s = *s_;
        const double bw = s.total_bandwidth_hz, pw = s.total_power_watts;
        const double ln2 = std::log(2.0);
        grad.setZero(dim());
        hess.setZero(dim(), dim());
        Vector dv(dim());
        for (Eigen::Index k = 0; k < nk_; ++k) {
            const auto& cav = s.cavs[static_cast<std::size_t>(k)];
            const double c = s.slot_duration_s / (static_cast<double>(s.num_slots) * cav.sample_size_bits);
            // v_k and its derivatives in the scaled variables.
            dv.setZero();
            double v = 0.0;
            Matrix local_hess = Matrix::Zero(dim(), dim());
            for (Eigen::Index n = 0; n < nn_; ++n) {
                const double u = bw * z(xi(k, n));
                const double p = pw * z(yi(k, n));
                const double q = s.reduced_gains(k, n) / s.noise_density_w_per_hz;
                const double w = u + q * p;
                v += c * u * std::log(w / u) / ln2;
                dv(xi(k, n)) = c * bw * (std::log(w / u) - q * p / w) / ln2;
                dv(yi(k, n)) = c * pw * q * u / (w * ln2);
                // Hessian of the perspective: -(q^2 / (w^2 ln2)) [p^2/u, -p; -p, u].
                const double h = -c * q * q / (w * w * ln2);
                local_hess(xi(k, n), xi(k, n)) = h * bw * bw * p * p / u;
                local_hess(xi(k, n), yi(k, n)) = -h * bw * pw * p;
                local_hess(yi(k, n), xi(k, n)) = -h * bw * pw * p;
                local_hess(yi(k, n), yi(k, n)) = h * pw * pw * u;
            }
            const double a = cav.curve.amplitude / static_cast<double>(nk_);
            const double b = cav.curve.exponent;
            const double d1 = -a * b * std::pow(v, -b - 1.0);
            const double d2 = a * b * (b + 1.0) * std::pow(v, -b - 2.0);
            grad += t * d1 * dv;
            hess += t * (d2 * dv * dv.transpose() + d1 * local_hess);
        }
        for (Eigen::Index i = 0; i < dim(); ++i) {
            grad(i) -= 1.0 / z(i);
            hess(i, i) += 1.0 / (z(i) * z(i));
        }
        double total = 0.0;
        for (Eigen::Index k = 0; k < nk_; ++k) {
            const double row = z.segment(yi(k, 0), nn_).sum();
            total += row;
            const double slack = row_caps_(k) - row;
            grad.segment(yi(k, 0), nn_).array() += 1.0 / slack;
            hess.block(yi(k, 0), yi(k, 0), nn_, nn_).array() += 1.0 / (slack * slack);
        }
        const double slack = total_cap_ - total;
        grad.tail(nk_ * nn_).array() += 1.0 / slack;
        hess.bottomRightCorner(nk_ * nn_, nk_ * nn_).array() += 1.0 / (slack * slack);
    }

    Vector random_interior(Rng& rng) const {
        Vector z(dim());
        for (Eigen::Index n = 0; n < nn_; ++n) {
            double sum = 0.0;
            for (Eigen::Index k = 0; k < nk_; ++k) sum += (z(xi(k, n)) = 0.05 + rng.exponential());
            for (Eigen::Index k = 0; k < nk_; ++k) z(xi(k, n)) /= sum;
        }
        double total = 0.0;
        for (Eigen::Index k = 0; k < nk_; ++k) {
            double sum = 0.0;
            for (Eigen::Index n = 0; n < nn_; ++n) sum += (z(yi(k, n)) = rng.uniform(0.1, 1.0));
            const double scale = rng.uniform(0.2, 0.9) * row_caps_(k) / sum;
            z.segment(yi(k, 0), nn_) *= scale;
            total += scale * sum;
        }
        if (total >= 0.9 * total_cap_) z.tail(nk_ * nn_) *= 0.9 * total_cap_ / total;
        return z;
    }

private:
    const Scenario* s_;
    Eigen::Index nk_, nn_;
    Vector row_caps_;
    double total_cap_ = 0.0;
    Eigen::Index num_ineq_ = 0;
    Matrix basis_;
};

// Barrier path from a strictly feasible point. Returns Newton steps used.
inline std::size_t barrier_path(const BarrierProblem& prob, Vector& z, std::size_t budget, bool& converged) {
    const Matrix& basis = prob.basis();
    const double m = static_cast<double>(prob.num_inequalities());
    double t = 1.0;
    std::size_t steps = 0;
    Vector grad;
    Matrix hess;
    converged = false;
    while (steps < budget) {
        // Centering.
        for (int inner = 0; inner < 200 && steps < budget; ++inner, ++steps) {
            prob.derivatives(z, t, grad, hess);
            const Vector reduced_grad = basis.transpose() * grad;
            const Matrix reduced_hess = basis.transpose() * hess * basis;
            const Vector dz = basis * reduced_hess.ldlt().solve(-reduced_grad);
            const double decrement = -grad.dot(dz);
            if (!(decrement > 1e-14)) break;
            const double phi0 = prob.barrier(z, t);
            double step = 1.0;
            while (step > 1e-20 && !(prob.barrier(z + step * dz, t) <= phi0 - 0.25 * step * decrement)) step *= 0.5;
            if (step <= 1e-20) break;
            z += step * dz;
            if (decrement < 1e-12) break;
        }
        const double f = prob.objective(z);
        if (m / t <= 1e-12 * std::abs(f)) {
            converged = true;
            break;
        }
        t *= 20.0;
    }
    return steps;
}

}  // namespace reference_detail

/// Best of `starts` interior-point runs from random strictly feasible
/// points, each limited to `budget` Newton steps. Restricted to K * N <= 64.
inline SolveResult reference_solve(const Scenario& s, std::size_t budget = 2000, std::size_t starts = 5,
                                   std::uint64_t seed = 0x5eed, std::vector<double>* start_objectives = nullptr) {
    s.validate();
    if (s.num_cavs() * s.num_slots > 64) throw DomainError("reference solver refused: K * N exceeds 64");
    const auto t_start = std::chrono::steady_clock::now();
    const reference_detail::BarrierProblem prob(s);
    Rng rng(seed);

    SolveResult best;
    for (std::size_t start = 0; start < starts; ++start) {
        Vector z = prob.random_interior(rng);
        bool converged = false;
        const std::size_t steps = reference_detail::barrier_path(prob, z, budget, converged);
        const double f = prob.objective(z);
        if (start_objectives) start_objectives->push_back(f);
        if (f < best.objective) {
            best.allocation = prob.to_allocation(z);
            best.objective = f;
            best.converged = converged;
            best.agp_iterations = steps;
        }
    }
    summarize(best, s);
    best.wall_time_s = detail::seconds_since(t_start);
    return best;
}

}  // namespace qot
