// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/model.hpp"

#include <cstdint>

namespace qot {

/// Brute-force simplex projection for verification: tries every support set,
/// solves the equality-constrained least squares on it in closed form and
/// keeps the closest feasible candidate. Exponential in K.
inline Vector qp_projection_oracle(const Vector& x, double budget) {
    const auto k = x.size();
    if (k < 1 || k > 12) throw DomainError("projection oracle supports 1 <= K <= 12");
    if (!(budget > 0.0)) throw DomainError("simplex budget must be positive");

    Vector best;
    double best_dist = kInfinity;
    Vector cand(k);
    for (std::uint32_t support = 1; support < (1u << k); ++support) {
        double sum = 0.0;
        int count = 0;
        for (Eigen::Index i = 0; i < k; ++i)
            if (support & (1u << i)) {
                sum += x(i);
                ++count;
            }
        const double shift = (sum - budget) / count;
        bool ok = true;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (support & (1u << i)) {
                cand(i) = x(i) - shift;
                if (cand(i) < -1e-14 * budget) ok = false;
            } else {
                cand(i) = 0.0;
            }
        }
        if (!ok) continue;
        cand = cand.cwiseMax(0.0);
        const double dist = (cand - x).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best = cand;
        }
    }
    return best;
}

}  // namespace qot
