// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace qot {

/// Scratch space for repeated column projections.
struct ProjectionWorkspace {
    std::vector<double> sorted_buffer;
    std::vector<double> prefix_sums;
    std::size_t threshold_index = 0;
};

/// Euclidean projection of x onto {u >= 0, sum(u) = budget}.
///
/// Sort descending into z, take the largest m with
/// (z_1 + ... + z_m - budget) / m < z_m, then shift by that threshold and
/// clip at zero.
template <class In, class Out>
void project_column(const In& x, double budget, Out&& u, ProjectionWorkspace& ws) {
    const auto size = static_cast<std::size_t>(x.size());
    if (!(budget > 0.0)) throw DomainError("simplex budget must be positive");
    if (size == 0) throw DomainError("cannot project an empty vector");

    ws.sorted_buffer.resize(size);
    ws.prefix_sums.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
        const double xi = x(static_cast<Eigen::Index>(i));
        if (!std::isfinite(xi)) throw DomainError("non-finite input to simplex projection");
        ws.sorted_buffer[i] = xi;
    }
    std::sort(ws.sorted_buffer.begin(), ws.sorted_buffer.end(), std::greater<>());

    double running = 0.0;
    double theta = 0.0;
    ws.threshold_index = 1;
    for (std::size_t m = 0; m < size; ++m) {
        running += ws.sorted_buffer[m];
        ws.prefix_sums[m] = running;
        const double candidate = (running - budget) / static_cast<double>(m + 1);
        if (candidate < ws.sorted_buffer[m]) {
            ws.threshold_index = m + 1;
            theta = candidate;
        }
    }

    for (std::size_t i = 0; i < size; ++i)
        u(static_cast<Eigen::Index>(i)) = std::max(0.0, x(static_cast<Eigen::Index>(i)) - theta);
}

inline Vector project_column(const Vector& x, double budget) {
    ProjectionWorkspace ws;
    Vector u(x.size());
    project_column(x, budget, u, ws);
    return u;
}

/// Column-wise projection; each slot is an independent simplex.
inline void project_matrix(const Matrix& x, double budget, Matrix& out, ProjectionWorkspace& ws) {
    out.resize(x.rows(), x.cols());
    for (Eigen::Index n = 0; n < x.cols(); ++n) project_column(x.col(n), budget, out.col(n), ws);
}

inline Matrix project_matrix(const Matrix& x, double budget) {
    ProjectionWorkspace ws;
    Matrix out;
    project_matrix(x, budget, out, ws);
    return out;
}

/// Projection onto {u >= floor, sum(u) = budget}: shift by the floor and
/// project onto the reduced simplex.
inline void project_matrix_floored(const Matrix& x, double budget, double floor, Matrix& out,
                                   ProjectionWorkspace& ws) {
    if (floor <= 0.0) {
        project_matrix(x, budget, out, ws);
        return;
    }
    const double reduced = budget - floor * static_cast<double>(x.rows());
    if (!(reduced > 0.0)) throw DomainError("bandwidth floor leaves no budget to allocate");
    out.resize(x.rows(), x.cols());
    Vector shifted(x.rows());
    for (Eigen::Index n = 0; n < x.cols(); ++n) {
        shifted = x.col(n).array() - floor;
        project_column(shifted, reduced, out.col(n), ws);
        out.col(n).array() += floor;
    }
}

}  // namespace qot
