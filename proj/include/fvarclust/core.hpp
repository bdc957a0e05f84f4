#pragma once

// Fibers (3D polylines carrying one scalar sample per vertex) and their
// decomposition into segments described by center, tangent, length and
// center signal.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fvarclust/error.hpp"

namespace fvarclust {

using Point3 = Eigen::Vector3d;

// Segments shorter than this (mm) are dropped by segment().
inline constexpr double kDegenerateSegmentLength = 1e-9;

class Fiber {
public:
    Fiber() = default;

    // Throws InvalidFiber unless points.size() >= 2, signal.size() ==
    // points.size() and every value is finite.
    Fiber(std::int64_t id, std::vector<Point3> points, std::vector<double> signal)
        : id_(id), points_(std::move(points)), signal_(std::move(signal)) {
        if (points_.size() < 2) {
            throw InvalidFiber("fiber " + std::to_string(id_) + " needs at least 2 points, got " +
                               std::to_string(points_.size()));
        }
        if (signal_.size() != points_.size()) {
            throw InvalidFiber("fiber " + std::to_string(id_) + " has " + std::to_string(points_.size()) +
                               " points but " + std::to_string(signal_.size()) + " signal values");
        }
        for (const auto& p : points_) {
            if (!p.allFinite()) {
                throw InvalidFiber("fiber " + std::to_string(id_) + " has a non-finite coordinate");
            }
        }
        for (double s : signal_) {
            if (!std::isfinite(s)) {
                throw InvalidFiber("fiber " + std::to_string(id_) + " has a non-finite signal value");
            }
        }
    }

    std::int64_t id() const noexcept { return id_; }
    const std::vector<Point3>& points() const noexcept { return points_; }
    const std::vector<double>& signal() const noexcept { return signal_; }
    std::size_t size() const noexcept { return points_.size(); }

    // Same curve traversed in the opposite direction.
    Fiber reversed() const {
        return Fiber(id_, {points_.rbegin(), points_.rend()}, {signal_.rbegin(), signal_.rend()});
    }

    Fiber translated(const Point3& offset) const {
        std::vector<Point3> moved;
        moved.reserve(points_.size());
        for (const auto& p : points_) moved.push_back(p + offset);
        return Fiber(id_, std::move(moved), signal_);
    }

    friend bool operator==(const Fiber& a, const Fiber& b) {
        return a.id_ == b.id_ && a.points_ == b.points_ && a.signal_ == b.signal_;
    }

private:
    std::int64_t id_ = 0;
    std::vector<Point3> points_;
    std::vector<double> signal_;
};

// Per-segment description of a polyline: x_p, beta_p, c_p = |beta_p|, f_p.
struct SegmentedFiber {
    std::vector<Point3> centers;
    std::vector<Point3> tangents;
    std::vector<double> lengths;
    std::vector<double> center_signal;

    std::size_t size() const noexcept { return centers.size(); }

    double total_length() const {
        double sum = 0.0;
        for (double c : lengths) sum += c;
        return sum;
    }
};

// One segment per consecutive vertex pair whose gap is at least
// kDegenerateSegmentLength. The center signal is the mean of the two
// endpoint samples.
inline SegmentedFiber segment(const Fiber& fiber) {
    const auto& pts = fiber.points();
    const auto& sig = fiber.signal();
    SegmentedFiber out;
    out.centers.reserve(pts.size() - 1);
    out.tangents.reserve(pts.size() - 1);
    out.lengths.reserve(pts.size() - 1);
    out.center_signal.reserve(pts.size() - 1);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const Point3 beta = pts[k + 1] - pts[k];
        const double c = beta.norm();
        if (c < kDegenerateSegmentLength) continue;
        out.centers.push_back(0.5 * (pts[k] + pts[k + 1]));
        out.tangents.push_back(beta);
        out.lengths.push_back(c);
        out.center_signal.push_back(0.5 * (sig[k] + sig[k + 1]));
    }
    if (out.size() == 0) {
        throw AllSegmentsDegenerate("fiber " + std::to_string(fiber.id()) + " has no segment longer than " +
                                    std::to_string(kDegenerateSegmentLength) + " mm");
    }
    return out;
}

// A fiber together with its segment decomposition, so that pairwise
// kernels do not re-segment on every evaluation.
struct PreparedFiber {
    Fiber fiber;
    SegmentedFiber segments;

    explicit PreparedFiber(Fiber f) : fiber(std::move(f)), segments(segment(fiber)) {}
};

}  // namespace fvarclust
