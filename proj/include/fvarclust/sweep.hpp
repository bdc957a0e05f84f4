#pragma once

// Cosine angle of selected fiber pairs over a grid of kernel bandwidths.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fvarclust/core.hpp"
#include "fvarclust/error.hpp"
#include "fvarclust/kernels.hpp"

namespace fvarclust {

inline const std::vector<double> kDefaultSweepLambdaW = {3.0, 5.0, 7.0, 9.0, 11.0};
inline const std::vector<double> kDefaultSweepLambdaM = {0.001, 0.005, 0.01, 0.05, 0.1};

struct SweepRow {
    double lambda_w = 0.0;
    double lambda_m = 0.0;
    std::size_t pair_id = 0;
    double angle_deg = 0.0;
};

// Rows ordered by lambda_w, then lambda_m, then pair.
inline std::vector<SweepRow> cosine_sweep(const std::vector<Fiber>& fibers, KernelModel model,
                                          const std::vector<double>& lambda_w, const std::vector<double>& lambda_m,
                                          const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                          double gamma = KernelParams{}.gamma) {
    std::vector<std::pair<PreparedFiber, PreparedFiber>> prepared;
    prepared.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        if (i >= fibers.size() || j >= fibers.size()) {
            throw InvalidArgument("pair (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range for " +
                                  std::to_string(fibers.size()) + " fibers");
        }
        prepared.emplace_back(PreparedFiber(fibers[i]), PreparedFiber(fibers[j]));
    }
    std::vector<SweepRow> rows;
    rows.reserve(lambda_w.size() * lambda_m.size() * pairs.size());
    for (double lw : lambda_w) {
        for (double lm : lambda_m) {
            const KernelParams params{lw, lm, gamma};
            params.validate();
            for (std::size_t p = 0; p < prepared.size(); ++p) {
                rows.push_back({lw, lm, p, cosine_angle(prepared[p].first, prepared[p].second, model, params)});
            }
        }
    }
    return rows;
}

}  // namespace fvarclust
