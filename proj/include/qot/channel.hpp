// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/model.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace qot {

/// Seeded mt19937_64 with distribution code written out here, so a seed
/// reproduces the same stream on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unit-mean exponential.
    double exponential() { return -std::log1p(-uniform()); }

private:
    std::mt19937_64 engine_;
};

enum class Fading { None, Rayleigh };

struct ChannelConfig {
    std::size_t num_bs = 10;
    double min_distance_m = 5.0;
    double max_distance_m = 150.0;
    double pathloss_ref_db = 30.0;
    double pathloss_exponent = 3.0;
    Fading fading = Fading::None;
    // Number of consecutive slots sharing one distance draw.
    std::size_t hold_distance_slots = 1;
    std::uint64_t seed = 1;

    void validate() const {
        if (num_bs == 0) throw DomainError("channel needs at least one base station");
        if (!(min_distance_m > 0.0) || !(min_distance_m < max_distance_m))
            throw DomainError("distance range must satisfy 0 < min < max");
        if (!(pathloss_exponent > 0.0)) throw DomainError("path-loss exponent must be positive");
        if (hold_distance_slots == 0) throw DomainError("hold_distance_slots must be >= 1");
    }
};

/// h_{l,k,n}: one K x N matrix per base station.
struct RawGains {
    std::vector<Matrix> per_bs;

    std::size_t num_bs() const { return per_bs.size(); }
};

struct AssociationMap {
    Eigen::MatrixXi assoc;  // K x N, base station index per (vehicle, slot)
};

/// Distance-dependent path loss, 10^(-(PL0 + 10 alpha log10 d) / 10).
inline double pathloss_gain(double distance_m, double ref_db, double exponent) {
    return std::pow(10.0, -(ref_db + 10.0 * exponent * std::log10(distance_m)) / 10.0);
}

inline RawGains generate_raw_gains(const ChannelConfig& cfg, std::size_t num_cavs, std::size_t num_slots) {
    cfg.validate();
    if (num_cavs == 0 || num_slots == 0) throw DomainError("K and N must be at least 1");
    Rng rng(cfg.seed);
    RawGains raw;
    raw.per_bs.assign(cfg.num_bs, Matrix(static_cast<Eigen::Index>(num_cavs), static_cast<Eigen::Index>(num_slots)));
    // Draw order is (l, k, n) so the stream layout is fixed.
    for (std::size_t l = 0; l < cfg.num_bs; ++l) {
        for (std::size_t k = 0; k < num_cavs; ++k) {
            double distance = 0.0;
            for (std::size_t n = 0; n < num_slots; ++n) {
                if (n % cfg.hold_distance_slots == 0)
                    distance = rng.uniform(cfg.min_distance_m, cfg.max_distance_m);
                double h = pathloss_gain(distance, cfg.pathloss_ref_db, cfg.pathloss_exponent);
                if (cfg.fading == Fading::Rayleigh) h *= rng.exponential();
                raw.per_bs[l](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) = h;
            }
        }
    }
    return raw;
}

/// Per (k, n), associate with the strongest base station; ties go to the
/// lowest index.
inline std::pair<AssociationMap, Matrix> reduce_association(const RawGains& raw) {
    if (raw.per_bs.empty()) throw DomainError("raw gains are empty");
    const Matrix& first = raw.per_bs.front();
    AssociationMap map{Eigen::MatrixXi::Zero(first.rows(), first.cols())};
    Matrix reduced = first;
    for (std::size_t l = 1; l < raw.per_bs.size(); ++l) {
        const Matrix& h = raw.per_bs[l];
        if (h.rows() != first.rows() || h.cols() != first.cols())
            throw DomainError("raw gain slices differ in shape");
        for (Eigen::Index k = 0; k < h.rows(); ++k)
            for (Eigen::Index n = 0; n < h.cols(); ++n)
                if (h(k, n) > reduced(k, n)) {
                    reduced(k, n) = h(k, n);
                    map.assoc(k, n) = static_cast<int>(l);
                }
    }
    return {std::move(map), std::move(reduced)};
}

inline Vector average_gains(const Matrix& reduced) {
    if (reduced.cols() == 0) throw DomainError("need at least one slot");
    return reduced.rowwise().mean();
}

}  // namespace qot
