// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/channel.hpp"
#include "qot/model.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace fixtures {

using qot::Matrix;
using qot::Scenario;
using qot::Vector;

inline qot::CavProfile cav(qot::Modality m, double bits, double cap, double a, double b) {
    qot::CavProfile c;
    c.modality = m;
    c.sample_size_bits = bits;
    c.power_cap_watts = cap;
    c.curve = {a, b};
    return c;
}

/// Communication parameters of the demo configuration with a generated
/// channel. Vehicles beyond the first two get a third profile.
inline Scenario demo_scenario(std::size_t num_slots, std::uint64_t seed, std::size_t num_cavs = 2,
                              std::size_t num_bs = 10) {
    Scenario s;
    s.num_slots = num_slots;
    s.slot_duration_s = 0.1;
    s.total_bandwidth_hz = 2e7;
    s.total_power_watts = 2.0;
    s.noise_density_w_per_hz = 1e-14;
    const std::vector<qot::CavProfile> pool = {cav(qot::Modality::PointCloud, 1.28e7, 1.0, 1.0, 0.42),
                                               cav(qot::Modality::Image, 5.6e6, 1.0, 1.0, 0.30),
                                               cav(qot::Modality::Image, 8e6, 0.7, 0.8, 0.35)};
    for (std::size_t k = 0; k < num_cavs; ++k) s.cavs.push_back(pool[k % pool.size()]);
    qot::ChannelConfig ch;
    ch.num_bs = num_bs;
    ch.seed = seed;
    s.reduced_gains = qot::reduce_association(qot::generate_raw_gains(ch, num_cavs, num_slots)).second;
    return s;
}

/// Unit-scale scenario with explicit gains.
inline Scenario unit_scenario(const Matrix& gains, const std::vector<qot::CavProfile>& cavs, double bandwidth = 1.0,
                              double power = 1.0) {
    Scenario s;
    s.cavs = cavs;
    s.num_slots = static_cast<std::size_t>(gains.cols());
    s.slot_duration_s = 1.0;
    s.total_bandwidth_hz = bandwidth;
    s.total_power_watts = power;
    s.noise_density_w_per_hz = 1.0;
    s.reduced_gains = gains;
    return s;
}

// Objective written out directly from the problem statement, for use as an
// oracle independent of the library's evaluation code.
inline double direct_objective(const Matrix& u, const Matrix& p, const Scenario& s) {
    double total = 0.0;
    const double nk = static_cast<double>(s.cavs.size());
    for (std::size_t k = 0; k < s.cavs.size(); ++k) {
        double v = 0.0;
        for (std::size_t n = 0; n < s.num_slots; ++n) {
            const double w = u(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
            const double q = p(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
            const double g = s.reduced_gains(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
            if (w > 0.0) v += s.slot_duration_s * w * std::log2(1.0 + g * q / (s.noise_density_w_per_hz * w));
        }
        v /= static_cast<double>(s.num_slots) * s.cavs[k].sample_size_bits;
        if (v <= 0.0) return std::numeric_limits<double>::infinity();
        total += s.cavs[k].curve.amplitude / nk * std::pow(v, -s.cavs[k].curve.exponent);
    }
    return total;
}

/// Golden-section minimum of a unimodal function on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc <= fd) {
            hi = d; d = c; fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c; c = d; fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    return 0.5 * (lo + hi);
}

/// Euclidean projection onto {x >= 0, sum x <= cap} by bisection on the
/// shift.
inline Vector project_capped_bisect(const Vector& y, double cap) {
    const Vector pos = y.cwiseMax(0.0);
    if (pos.sum() <= cap) return pos;
    double lo = 0.0, hi = y.maxCoeff();
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((y.array() - mid).cwiseMax(0.0).sum() > cap ? lo : hi) = mid;
    }
    return (y.array() - hi).cwiseMax(0.0).matrix();
}

}  // namespace fixtures
