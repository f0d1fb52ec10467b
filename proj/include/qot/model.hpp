// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qot {

/// K x N matrix; rows are vehicles, columns are time slots.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a numerical precondition (positive rates, nonnegative
/// resources, matching dimensions) does not hold.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kLn2 = 0.69314718055994530942;

enum class Modality { PointCloud, Image };

/// Power-law learning curve: error = amplitude * samples^(-exponent).
struct LearningCurve {
    double amplitude = 1.0;
    double exponent = 0.5;
};

struct CavProfile {
    Modality modality = Modality::PointCloud;
    double sample_size_bits = 1.0;
    double power_cap_watts = 1.0;
    LearningCurve curve;
};

/// A problem instance after base-station association has been reduced, so
/// every (vehicle, slot) pair carries a single effective gain.
struct Scenario {
    std::vector<CavProfile> cavs;
    std::size_t num_slots = 1;
    double slot_duration_s = 0.1;
    double total_bandwidth_hz = 1.0;
    double total_power_watts = 1.0;
    double noise_density_w_per_hz = 1e-14;
    Matrix reduced_gains;  // K x N

    std::size_t num_cavs() const { return cavs.size(); }

    double sum_power_caps() const {
        double s = 0.0;
        for (const auto& c : cavs) s += c.power_cap_watts;
        return s;
    }

    /// Throws DomainError when an invariant is broken.
    void validate() const {
        if (cavs.empty()) throw DomainError("scenario has no vehicles");
        if (num_slots == 0) throw DomainError("scenario has no time slots");
        auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
        if (!positive(slot_duration_s) || !positive(total_bandwidth_hz) ||
            !positive(total_power_watts) || !positive(noise_density_w_per_hz))
            throw DomainError("scenario scalars must be positive and finite");
        for (std::size_t k = 0; k < cavs.size(); ++k) {
            const auto& c = cavs[k];
            if (!positive(c.sample_size_bits) || !positive(c.power_cap_watts) ||
                !positive(c.curve.amplitude) || !positive(c.curve.exponent))
                throw DomainError("vehicle " + std::to_string(k) + " has a non-positive parameter");
        }
        if (static_cast<std::size_t>(reduced_gains.rows()) != cavs.size() ||
            static_cast<std::size_t>(reduced_gains.cols()) != num_slots)
            throw DomainError("reduced gain matrix must be K x N");
        for (Eigen::Index k = 0; k < reduced_gains.rows(); ++k)
            for (Eigen::Index n = 0; n < reduced_gains.cols(); ++n)
                if (!positive(reduced_gains(k, n)))
                    throw DomainError("reduced gains must be positive and finite (vehicle " +
                                      std::to_string(k) + ", slot " + std::to_string(n) + ")");
    }
};

struct Allocation {
    Matrix bandwidth;  // u, Hz
    Matrix power;      // p, W
};

struct FeasibilityReport {
    Vector per_cav_power_violation;
    double total_power_violation = 0.0;
    Vector per_slot_bandwidth_violation;
    double max_negativity = 0.0;
    bool feasible = false;
};

/// Shannon rate w * log2(1 + h q / (N0 w)); zero bandwidth gives zero rate.
inline double achievable_rate(double bandwidth_hz, double power_w, double gain, double noise_density) {
    if (!(bandwidth_hz >= 0.0) || !(power_w >= 0.0))
        throw DomainError("bandwidth and power must be nonnegative");
    if (!(gain > 0.0) || !(noise_density > 0.0))
        throw DomainError("gain and noise density must be positive");
    if (bandwidth_hz == 0.0) return 0.0;
    return bandwidth_hz * std::log1p(gain * power_w / (noise_density * bandwidth_hz)) / kLn2;
}

inline void check_dimensions(const Matrix& bandwidth, const Matrix& power, const Scenario& s) {
    const auto k = static_cast<Eigen::Index>(s.num_cavs());
    const auto n = static_cast<Eigen::Index>(s.num_slots);
    if (bandwidth.rows() != k || bandwidth.cols() != n || power.rows() != k || power.cols() != n)
        throw DomainError("allocation dimensions do not match the scenario");
}

namespace detail {

inline double samples_unchecked(const Matrix& bandwidth, const Matrix& power, const Scenario& s, std::size_t k) {
    const auto row = static_cast<Eigen::Index>(k);
    double sum = 0.0;
    for (Eigen::Index n = 0; n < bandwidth.cols(); ++n)
        sum += achievable_rate(bandwidth(row, n), power(row, n), s.reduced_gains(row, n), s.noise_density_w_per_hz);
    return s.slot_duration_s * sum / (static_cast<double>(s.num_slots) * s.cavs[k].sample_size_bits);
}

}  // namespace detail

/// Samples uploaded by vehicle k: sum_n T * R_{k,n} / (N * D_k).
inline double sample_count(const Matrix& bandwidth, const Matrix& power, const Scenario& s, std::size_t k) {
    if (k >= s.num_cavs()) throw std::out_of_range("vehicle index out of range");
    check_dimensions(bandwidth, power, s);
    return detail::samples_unchecked(bandwidth, power, s, k);
}

inline double sample_count(const Allocation& alloc, const Scenario& s, std::size_t k) {
    return sample_count(alloc.bandwidth, alloc.power, s, k);
}

/// a * v^(-b). Non-positive sample counts map to +infinity.
inline double perception_error(double samples, const LearningCurve& curve) {
    if (!(samples > 0.0)) return kInfinity;
    return curve.amplitude * std::pow(samples, -curve.exponent);
}

/// Average perception error sum_k (a_k / K) v_k^(-b_k).
inline double objective(const Matrix& bandwidth, const Matrix& power, const Scenario& s) {
    check_dimensions(bandwidth, power, s);
    const double inv_k = 1.0 / static_cast<double>(s.num_cavs());
    double total = 0.0;
    for (std::size_t k = 0; k < s.num_cavs(); ++k) {
        const double err = perception_error(detail::samples_unchecked(bandwidth, power, s, k), s.cavs[k].curve);
        if (std::isinf(err)) return kInfinity;
        total += inv_k * err;
    }
    return total;
}

inline double objective(const Allocation& alloc, const Scenario& s) {
    return objective(alloc.bandwidth, alloc.power, s);
}

inline FeasibilityReport check_feasibility(const Allocation& alloc, const Scenario& s, double tol) {
    check_dimensions(alloc.bandwidth, alloc.power, s);
    const auto nk = static_cast<Eigen::Index>(s.num_cavs());
    const double n_slots = static_cast<double>(s.num_slots);

    FeasibilityReport r;
    r.per_cav_power_violation.resize(nk);
    double total_avg = 0.0;
    for (Eigen::Index k = 0; k < nk; ++k) {
        const double avg = alloc.power.row(k).sum() / n_slots;
        total_avg += avg;
        r.per_cav_power_violation(k) = avg - s.cavs[static_cast<std::size_t>(k)].power_cap_watts;
    }
    r.total_power_violation = total_avg - s.total_power_watts;
    r.per_slot_bandwidth_violation =
        (alloc.bandwidth.colwise().sum().array() - s.total_bandwidth_hz).transpose();
    r.max_negativity = std::max(0.0, -std::min(alloc.bandwidth.minCoeff(), alloc.power.minCoeff()));

    r.feasible = r.max_negativity <= tol && r.total_power_violation <= tol &&
                 (r.per_cav_power_violation.array() <= tol).all() &&
                 (r.per_slot_bandwidth_violation.array().abs() <= tol).all();
    return r;
}

}  // namespace qot
