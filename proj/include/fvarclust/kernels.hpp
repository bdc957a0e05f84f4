#pragma once

// Pairwise fiber comparison models: functional varifolds, varifolds,
// signal-only, and the RBF of the mean closest-point (MCP) distance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>

#include "fvarclust/core.hpp"
#include "fvarclust/error.hpp"

namespace fvarclust {

enum class KernelModel : std::uint8_t {
    FunctionalVarifold = 0,
    Varifold = 1,
    SignalOnly = 2,
    McpRbf = 3,
};

inline constexpr std::string_view model_name(KernelModel m) {
    switch (m) {
        case KernelModel::FunctionalVarifold: return "fvar";
        case KernelModel::Varifold: return "var";
        case KernelModel::SignalOnly: return "signal";
        case KernelModel::McpRbf: return "mcp";
    }
    return "unknown";
}

// Accepts the short names from model_name() plus "gfa" for SignalOnly.
inline KernelModel parse_model(std::string_view name) {
    if (name == "fvar") return KernelModel::FunctionalVarifold;
    if (name == "var") return KernelModel::Varifold;
    if (name == "signal" || name == "gfa") return KernelModel::SignalOnly;
    if (name == "mcp") return KernelModel::McpRbf;
    throw InvalidArgument("unknown kernel model '" + std::string(name) + "' (expected fvar, var, signal, mcp)");
}

inline KernelModel model_from_tag(std::uint8_t tag) {
    if (tag > static_cast<std::uint8_t>(KernelModel::McpRbf)) {
        throw InvalidArgument("unknown kernel model tag " + std::to_string(tag));
    }
    return static_cast<KernelModel>(tag);
}

struct KernelParams {
    double lambda_w = 7.0;   // mm, spatial Gaussian bandwidth
    double lambda_m = 0.01;  // signal Gaussian bandwidth
    double gamma = 0.007;    // RBF coefficient on squared MCP distance

    void validate() const {
        auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
        if (!positive(lambda_w)) throw InvalidArgument("lambda_w must be finite and > 0");
        if (!positive(lambda_m)) throw InvalidArgument("lambda_m must be finite and > 0");
        if (!positive(gamma)) throw InvalidArgument("gamma must be finite and > 0");
    }

    friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

namespace detail {

// (beta . gamma / (c d))^2 * c d, the Cauchy-Binet factor times the
// segment-length weights.
inline double weighted_cauchy_binet(const Point3& beta, double c, const Point3& gamma, double d) {
    const double cos_angle = beta.dot(gamma) / (c * d);
    return cos_angle * cos_angle * c * d;
}

}  // namespace detail

inline double fvar_inner(const SegmentedFiber& a, const SegmentedFiber& b, const KernelParams& params) {
    const double inv_w2 = 1.0 / (params.lambda_w * params.lambda_w);
    const double inv_m2 = 1.0 / (params.lambda_m * params.lambda_m);
    double sum = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        for (std::size_t q = 0; q < b.size(); ++q) {
            const double df = a.center_signal[p] - b.center_signal[q];
            const double dx2 = (a.centers[p] - b.centers[q]).squaredNorm();
            sum += std::exp(-df * df * inv_m2) * std::exp(-dx2 * inv_w2) *
                   detail::weighted_cauchy_binet(a.tangents[p], a.lengths[p], b.tangents[q], b.lengths[q]);
        }
    }
    return sum;
}

inline double var_inner(const SegmentedFiber& a, const SegmentedFiber& b, const KernelParams& params) {
    const double inv_w2 = 1.0 / (params.lambda_w * params.lambda_w);
    double sum = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        for (std::size_t q = 0; q < b.size(); ++q) {
            const double dx2 = (a.centers[p] - b.centers[q]).squaredNorm();
            sum += std::exp(-dx2 * inv_w2) *
                   detail::weighted_cauchy_binet(a.tangents[p], a.lengths[p], b.tangents[q], b.lengths[q]);
        }
    }
    return sum;
}

// Signal Gaussian weighted by segment lengths; no geometric factor.
inline double signal_inner(const SegmentedFiber& a, const SegmentedFiber& b, const KernelParams& params) {
    const double inv_m2 = 1.0 / (params.lambda_m * params.lambda_m);
    double sum = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        for (std::size_t q = 0; q < b.size(); ++q) {
            const double df = a.center_signal[p] - b.center_signal[q];
            sum += std::exp(-df * df * inv_m2) * a.lengths[p] * b.lengths[q];
        }
    }
    return sum;
}

namespace detail {

inline double mean_closest_point(const Fiber& from, const Fiber& to) {
    double sum = 0.0;
    for (const auto& p : from.points()) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : to.points()) best = std::min(best, (p - q).squaredNorm());
        sum += std::sqrt(best);
    }
    return sum / static_cast<double>(from.size());
}

}  // namespace detail

// Symmetrized vertex-based mean closest-point distance (mm).
inline double mcp_distance(const Fiber& a, const Fiber& b) {
    return 0.5 * (detail::mean_closest_point(a, b) + detail::mean_closest_point(b, a));
}

inline double mcp_rbf(const Fiber& a, const Fiber& b, const KernelParams& params) {
    const double d = mcp_distance(a, b);
    return std::exp(-params.gamma * d * d);
}

inline double pair_inner(KernelModel model, const PreparedFiber& a, const PreparedFiber& b,
                         const KernelParams& params) {
    switch (model) {
        case KernelModel::FunctionalVarifold: return fvar_inner(a.segments, b.segments, params);
        case KernelModel::Varifold: return var_inner(a.segments, b.segments, params);
        case KernelModel::SignalOnly: return signal_inner(a.segments, b.segments, params);
        case KernelModel::McpRbf: return mcp_rbf(a.fiber, b.fiber, params);
    }
    throw InvalidArgument("unknown kernel model");
}

// Angle (degrees) between two fibers in the model's feature space.
inline double cosine_angle(const PreparedFiber& a, const PreparedFiber& b, KernelModel model,
                           const KernelParams& params) {
    const double aa = pair_inner(model, a, a, params);
    const double bb = pair_inner(model, b, b, params);
    constexpr double tiny = std::numeric_limits<double>::min();
    if (!(aa > tiny)) throw ZeroNormFiber("fiber " + std::to_string(a.fiber.id()) + " has zero self inner product");
    if (!(bb > tiny)) throw ZeroNormFiber("fiber " + std::to_string(b.fiber.id()) + " has zero self inner product");
    const double ratio = std::clamp(pair_inner(model, a, b, params) / std::sqrt(aa * bb), -1.0, 1.0);
    return std::acos(ratio) * 180.0 / std::numbers::pi;
}

inline double cosine_angle(const Fiber& a, const Fiber& b, KernelModel model, const KernelParams& params) {
    return cosine_angle(PreparedFiber(a), PreparedFiber(b), model, params);
}

}  // namespace fvarclust
