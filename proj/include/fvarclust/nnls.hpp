#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "fvarclust/error.hpp"

namespace fvarclust {

// Lawson-Hanson active set method in normal-equation form:
//   minimize 0.5 x^T G x - r^T x   subject to x >= 0
// G must be symmetric positive semidefinite. Sub-problems on the passive set
// use a complete orthogonal decomposition, so singular G is tolerated.
inline Eigen::VectorXd nnls_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs, double tol = 1e-10) {
    const Eigen::Index k = rhs.size();
    if (gram.rows() != k || gram.cols() != k) throw DimensionMismatch("nnls_gram: gram and rhs sizes differ");

    Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
    std::vector<bool> passive(static_cast<std::size_t>(k), false);
    const int max_outer = 3 * static_cast<int>(k) + 10;

    auto solve_passive = [&]() {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
        }
        const auto p = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd sub(p, p);
        Eigen::VectorXd b(p);
        for (Eigen::Index a = 0; a < p; ++a) {
            b(a) = rhs(idx[a]);
            for (Eigen::Index c = 0; c < p; ++c) sub(a, c) = gram(idx[a], idx[c]);
        }
        const Eigen::VectorXd zp = sub.completeOrthogonalDecomposition().solve(b);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
        for (Eigen::Index a = 0; a < p; ++a) z(idx[a]) = zp(a);
        return z;
    };

    for (int outer = 0; outer < max_outer; ++outer) {
        const Eigen::VectorXd grad = rhs - gram * x;
        Eigen::Index best = -1;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (passive[static_cast<std::size_t>(i)]) continue;
            if (grad(i) > tol && (best < 0 || grad(i) > grad(best))) best = i;
        }
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;

        for (int inner = 0; inner < max_outer; ++inner) {
            const Eigen::VectorXd z = solve_passive();
            double alpha = 1.0;
            bool feasible = true;
            for (Eigen::Index i = 0; i < k; ++i) {
                if (!passive[static_cast<std::size_t>(i)] || z(i) > 0.0) continue;
                feasible = false;
                const double denom = x(i) - z(i);
                if (denom > 0.0) alpha = std::min(alpha, x(i) / denom);
            }
            if (feasible) {
                x = z;
                break;
            }
            x += alpha * (z - x);
            for (Eigen::Index i = 0; i < k; ++i) {
                if (passive[static_cast<std::size_t>(i)] && x(i) <= tol) {
                    passive[static_cast<std::size_t>(i)] = false;
                    x(i) = 0.0;
                }
            }
        }
    }
    return x;
}

}  // namespace fvarclust
