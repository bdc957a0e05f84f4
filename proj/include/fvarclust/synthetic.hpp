#pragma once

// Synthetic fiber sets with planted bundle structure. Each bundle is a
// jittered copy of a smooth template curve carrying a bundle-specific signal
// profile. Templates all have the same arc length, so length alone never
// separates bundles.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fvarclust/core.hpp"

namespace fvarclust {

// signal(t) = base + amplitude * sin(2*pi*frequency*t + phase), t in [0, 1]
// the normalized arc-length position along the template.
struct SignalProfile {
    double base = 0.5;
    double amplitude = 0.0;
    double frequency = 1.0;
    double phase = 0.0;

    double operator()(double t) const {
        return base + amplitude * std::sin(2.0 * std::numbers::pi * frequency * t + phase);
    }
};

// Two alternating profile families: even bundles get a low hump, odd bundles
// a higher full wave.
inline SignalProfile default_signal_profile(std::size_t bundle) {
    if (bundle % 2 == 0) return {0.45, 0.05, 0.5, 0.0};
    return {0.60, 0.05, 1.0, 0.0};
}

struct SyntheticBundleSpec {
    std::size_t bundle_count = 4;
    std::size_t fibers_per_bundle = 50;
    std::size_t points_per_fiber = 30;
    double geometry_jitter = 0.3;  // mm, per-vertex Gaussian std-dev
    double bundle_spread = 1.0;    // mm, per-fiber rigid offset std-dev
    double signal_jitter = 0.005;  // per-vertex Gaussian std-dev on the signal
    // One per bundle; empty means default_signal_profile(b).
    std::vector<SignalProfile> signal_profiles;
    // Template curve index per bundle; empty means bundle b uses template b.
    // Two bundles with the same index share their geometry exactly.
    std::vector<std::size_t> template_of_bundle;
    std::uint64_t seed = 0;

    void validate() const {
        if (bundle_count < 1) throw InvalidArgument("bundle_count must be >= 1");
        if (fibers_per_bundle < 1) throw InvalidArgument("fibers_per_bundle must be >= 1");
        if (points_per_fiber < 2) throw InvalidArgument("points_per_fiber must be >= 2");
        if (!(geometry_jitter >= 0.0) || !std::isfinite(geometry_jitter)) {
            throw InvalidArgument("geometry_jitter must be finite and >= 0");
        }
        if (!(bundle_spread >= 0.0) || !std::isfinite(bundle_spread)) {
            throw InvalidArgument("bundle_spread must be finite and >= 0");
        }
        if (!(signal_jitter >= 0.0) || !std::isfinite(signal_jitter)) {
            throw InvalidArgument("signal_jitter must be finite and >= 0");
        }
        if (!signal_profiles.empty() && signal_profiles.size() != bundle_count) {
            throw InvalidArgument("signal_profiles must be empty or have one entry per bundle");
        }
        if (!template_of_bundle.empty() && template_of_bundle.size() != bundle_count) {
            throw InvalidArgument("template_of_bundle must be empty or have one entry per bundle");
        }
    }

    SignalProfile profile(std::size_t bundle) const {
        return signal_profiles.empty() ? default_signal_profile(bundle) : signal_profiles[bundle];
    }

    std::size_t template_index(std::size_t bundle) const {
        return template_of_bundle.empty() ? bundle : template_of_bundle[bundle];
    }
};

struct SyntheticSet {
    std::vector<Fiber> fibers;
    std::vector<int> labels;  // planted bundle per fiber
};

inline constexpr double kTemplateArcLength = 60.0;  // mm
inline constexpr double kTemplateSpacing = 30.0;    // mm between template levels

// Point at normalized arc length t on template curve k. Even templates are
// planar arcs, odd templates are helices; template k sits at height
// k * kTemplateSpacing and is rotated about the vertical axis.
inline Point3 template_point(std::size_t k, double t) {
    const double level = static_cast<double>(k) * kTemplateSpacing;
    const double rot = 0.6 * static_cast<double>(k);
    Point3 local;
    if (k % 2 == 0) {
        constexpr double radius = 30.0;
        const double sweep = kTemplateArcLength / radius;
        const double theta = -0.5 * sweep + sweep * t;
        local = {radius * std::sin(theta), radius * (1.0 - std::cos(theta)), 0.0};
    } else {
        constexpr double radius = 6.0;
        constexpr double turns = 1.5;
        const double omega = 2.0 * std::numbers::pi * turns;
        const double rise = std::sqrt(kTemplateArcLength * kTemplateArcLength - radius * radius * omega * omega);
        const double theta = omega * t;
        local = {rise * (t - 0.5), radius * std::cos(theta), radius * std::sin(theta)};
    }
    const double c = std::cos(rot);
    const double s = std::sin(rot);
    return {c * local.x() - s * local.y(), s * local.x() + c * local.y(), local.z() + level};
}

inline SyntheticSet synthesize(const SyntheticBundleSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> unit_normal(0.0, 1.0);

    SyntheticSet out;
    out.fibers.reserve(spec.bundle_count * spec.fibers_per_bundle);
    out.labels.reserve(spec.bundle_count * spec.fibers_per_bundle);
    const double last = static_cast<double>(spec.points_per_fiber - 1);
    std::int64_t next_id = 0;
    for (std::size_t b = 0; b < spec.bundle_count; ++b) {
        const std::size_t tmpl = spec.template_index(b);
        const SignalProfile profile = spec.profile(b);
        for (std::size_t f = 0; f < spec.fibers_per_bundle; ++f) {
            Point3 offset = Point3::Zero();
            if (spec.bundle_spread > 0.0) {
                for (int d = 0; d < 3; ++d) offset[d] = spec.bundle_spread * unit_normal(rng);
            }
            std::vector<Point3> points;
            std::vector<double> signal;
            points.reserve(spec.points_per_fiber);
            signal.reserve(spec.points_per_fiber);
            for (std::size_t v = 0; v < spec.points_per_fiber; ++v) {
                const double t = static_cast<double>(v) / last;
                Point3 p = template_point(tmpl, t) + offset;
                double s = profile(t);
                if (spec.geometry_jitter > 0.0) {
                    for (int d = 0; d < 3; ++d) p[d] += spec.geometry_jitter * unit_normal(rng);
                }
                if (spec.signal_jitter > 0.0) s += spec.signal_jitter * unit_normal(rng);
                points.push_back(p);
                signal.push_back(s);
            }
            out.fibers.emplace_back(next_id++, std::move(points), std::move(signal));
            out.labels.push_back(static_cast<int>(b));
        }
    }
    return out;
}

// The planted layout used for bundle-recovery checks: `bundle_count`
// bundles where, with `shared_geometry`, the last bundle reuses the
// previous bundle's template curve but keeps its own signal profile.
inline SyntheticBundleSpec planted_bundle_spec(std::size_t bundle_count, std::size_t fibers_per_bundle,
                                               std::uint64_t seed, bool shared_geometry = true) {
    SyntheticBundleSpec spec;
    spec.bundle_count = bundle_count;
    spec.fibers_per_bundle = fibers_per_bundle;
    spec.seed = seed;
    if (shared_geometry && bundle_count >= 2) {
        for (std::size_t b = 0; b < bundle_count; ++b) spec.template_of_bundle.push_back(b);
        spec.template_of_bundle.back() = bundle_count - 2;
    }
    return spec;
}

}  // namespace fvarclust
