#pragma once

// Hard assignments from sparse codes, silhouette in the kernel-induced
// distance, and the adjusted Rand index.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fvarclust/dictionary.hpp"
#include "fvarclust/error.hpp"
#include "fvarclust/gram.hpp"

namespace fvarclust {

inline constexpr int kUnassigned = -1;

enum class AssignmentSource { ArgmaxOfCodes, Planted };

struct ClusterAssignment {
    std::vector<int> labels;  // kUnassigned for fibers with an all-zero code
    std::size_t cluster_count = 0;
    AssignmentSource source = AssignmentSource::ArgmaxOfCodes;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t unassigned_count() const {
        return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kUnassigned));
    }
};

inline ClusterAssignment planted_assignment(std::vector<int> labels) {
    ClusterAssignment out;
    int top = -1;
    for (int l : labels) {
        if (l < 0) throw InvalidArgument("planted labels must be non-negative");
        top = std::max(top, l);
    }
    out.labels = std::move(labels);
    out.cluster_count = static_cast<std::size_t>(top + 1);
    out.source = AssignmentSource::Planted;
    return out;
}

// Argmax over each code column; ties go to the lowest atom index.
inline ClusterAssignment hard_assign(const SparseCodes& w) {
    ClusterAssignment out;
    out.cluster_count = w.atom_count();
    out.labels.assign(w.fiber_count(), kUnassigned);
    for (Eigen::Index i = 0; i < w.codes.cols(); ++i) {
        double best = 0.0;
        for (Eigen::Index j = 0; j < w.codes.rows(); ++j) {
            if (w.codes(j, i) > best) {
                best = w.codes(j, i);
                out.labels[static_cast<std::size_t>(i)] = static_cast<int>(j);
            }
        }
    }
    return out;
}

struct ClusterSilhouette {
    int label = 0;
    std::size_t size = 0;
    double mean = 0.0;
};

struct SilhouetteReport {
    std::vector<std::size_t> fibers;   // indices scored, i.e. the assigned fibers
    std::vector<double> per_fiber;     // parallel to `fibers`
    double mean = 0.0;
    std::vector<ClusterSilhouette> per_cluster;  // ascending label
    std::size_t unassigned = 0;
};

// Silhouette with distances sqrt(Q_ii + Q_jj - 2 Q_ij). Unassigned fibers
// are skipped; a fiber alone in its cluster scores 0.
inline SilhouetteReport silhouette(const Eigen::MatrixXd& q, const ClusterAssignment& assignment) {
    if (q.rows() != q.cols()) throw DimensionMismatch("Gram matrix is not square");
    if (static_cast<Eigen::Index>(assignment.size()) != q.rows()) {
        throw DimensionMismatch("assignment has " + std::to_string(assignment.size()) + " labels, Gram has " +
                                std::to_string(q.rows()));
    }
    std::map<int, std::vector<std::size_t>> members;
    SilhouetteReport report;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        const int l = assignment.labels[i];
        if (l == kUnassigned) {
            ++report.unassigned;
            continue;
        }
        members[l].push_back(i);
        report.fibers.push_back(i);
    }
    if (members.size() < 2) {
        throw SingleClusterInput("silhouette needs at least 2 non-empty clusters, got " + std::to_string(members.size()));
    }

    const Eigen::MatrixXd dist = kernel_distance_matrix(q);
    std::map<int, double> cluster_sum;
    report.per_fiber.reserve(report.fibers.size());
    for (std::size_t i : report.fibers) {
        const int own = assignment.labels[i];
        double s = 0.0;
        if (members[own].size() > 1) {
            double a = 0.0;
            double b = std::numeric_limits<double>::infinity();
            for (const auto& [label, idx] : members) {
                double sum = 0.0;
                for (std::size_t j : idx) sum += dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (label == own) {
                    a = sum / static_cast<double>(idx.size() - 1);
                } else {
                    b = std::min(b, sum / static_cast<double>(idx.size()));
                }
            }
            const double denom = std::max(a, b);
            s = denom > 0.0 ? (b - a) / denom : 0.0;
        }
        report.per_fiber.push_back(s);
        cluster_sum[own] += s;
    }
    double total = 0.0;
    for (double s : report.per_fiber) total += s;
    report.mean = total / static_cast<double>(report.per_fiber.size());
    for (const auto& [label, idx] : members) {
        report.per_cluster.push_back({label, idx.size(), cluster_sum[label] / static_cast<double>(idx.size())});
    }
    return report;
}

inline SilhouetteReport silhouette(const GramMatrix& q, const ClusterAssignment& assignment) {
    return silhouette(q.values, assignment);
}

// Hubert-Arabie adjusted Rand index. Unassigned fibers form their own
// label. Two identical single-block partitions score 1.
inline double adjusted_rand_index(const ClusterAssignment& a, const ClusterAssignment& b) {
    if (a.size() != b.size()) {
        throw LengthMismatch("partitions have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                             " labels");
    }
    const std::size_t n = a.size();
    if (n < 2) return 1.0;
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows;
    std::map<int, double> cols;
    for (std::size_t i = 0; i < n; ++i) {
        table[{a.labels[i], b.labels[i]}] += 1.0;
        rows[a.labels[i]] += 1.0;
        cols[b.labels[i]] += 1.0;
    }
    auto pairs = [](double k) { return 0.5 * k * (k - 1.0); };
    double index = 0.0;
    for (const auto& [key, count] : table) index += pairs(count);
    double sum_rows = 0.0;
    for (const auto& [key, count] : rows) sum_rows += pairs(count);
    double sum_cols = 0.0;
    for (const auto& [key, count] : cols) sum_cols += pairs(count);
    const double expected = sum_rows * sum_cols / pairs(static_cast<double>(n));
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return index == max_index ? 1.0 : 0.0;
    return (index - expected) / (max_index - expected);
}

}  // namespace fvarclust
