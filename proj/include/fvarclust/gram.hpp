#pragma once

// Gram matrices of pairwise kernel values over a fiber collection, the
// Nystrom low-rank approximation, and the kernel-induced distance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "fvarclust/core.hpp"
#include "fvarclust/error.hpp"
#include "fvarclust/kernels.hpp"
#include "fvarclust/random.hpp"

namespace fvarclust {

struct GramMatrix {
    Eigen::MatrixXd values;
    KernelModel model = KernelModel::FunctionalVarifold;
    KernelParams params;

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.rows()); }
    double operator()(std::size_t i, std::size_t j) const {
        return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
};

// Relative cutoff applied to the landmark block spectrum in nystrom_gram.
inline constexpr double kNystromEigenCutoff = 1e-10;

inline std::vector<PreparedFiber> prepare_all(std::span<const Fiber> fibers) {
    std::vector<PreparedFiber> out;
    out.reserve(fibers.size());
    for (std::size_t i = 0; i < fibers.size(); ++i) {
        try {
            out.emplace_back(fibers[i]);
        } catch (const Error& e) {
            throw FiberError(i, e.what());
        }
    }
    return out;
}

namespace detail {

inline unsigned resolve_threads(unsigned requested, std::size_t work) {
    unsigned t = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(work, 1)));
}

// Calls body(i) for i in [0, n), rows interleaved across workers. Each i is
// handled by exactly one worker.
template <class Body>
void parallel_rows(std::size_t n, unsigned threads, Body&& body) {
    const unsigned workers = resolve_threads(threads, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    }
}

}  // namespace detail

// `threads == 0` uses the hardware concurrency. Only the upper triangle is
// evaluated; the lower triangle is mirrored, so the result is exactly
// symmetric and independent of the thread count.
inline GramMatrix compute_gram(std::span<const Fiber> fibers, KernelModel model, const KernelParams& params,
                               unsigned threads = 1) {
    params.validate();
    if (fibers.empty()) throw InvalidArgument("compute_gram needs at least one fiber");
    const auto prepared = prepare_all(fibers);
    const std::size_t n = prepared.size();
    GramMatrix g{Eigen::MatrixXd(n, n), model, params};
    detail::parallel_rows(n, threads, [&](std::size_t i) {
        for (std::size_t j = i; j < n; ++j) {
            g.values(i, j) = pair_inner(model, prepared[i], prepared[j], params);
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) g.values(i, j) = g.values(j, i);
    }
    return g;
}

// Nystrom approximation C * pinv(K_LL) * C^T from the given landmark
// indices. Eigenvalues of K_LL below kNystromEigenCutoff * max are dropped.
inline GramMatrix nystrom_gram_at(std::span<const Fiber> fibers, KernelModel model, const KernelParams& params,
                                  std::span<const std::size_t> landmarks, unsigned threads = 1) {
    params.validate();
    const std::size_t n = fibers.size();
    const std::size_t l = landmarks.size();
    if (l < 1 || l > n) {
        throw InvalidArgument("landmark count must lie in [1, " + std::to_string(n) + "], got " + std::to_string(l));
    }
    for (std::size_t idx : landmarks) {
        if (idx >= n) throw InvalidArgument("landmark index " + std::to_string(idx) + " out of range");
    }
    const auto prepared = prepare_all(fibers);

    Eigen::MatrixXd cross(n, l);
    detail::parallel_rows(n, threads, [&](std::size_t i) {
        for (std::size_t k = 0; k < l; ++k) cross(i, k) = pair_inner(model, prepared[i], prepared[landmarks[k]], params);
    });
    Eigen::MatrixXd block(l, l);
    for (std::size_t a = 0; a < l; ++a) {
        for (std::size_t b = a; b < l; ++b) {
            block(a, b) = cross(landmarks[a], b);
            block(b, a) = block(a, b);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double top = lambda.maxCoeff();
    if (!(top > 0.0)) throw SingularLandmarkBlock("landmark kernel block has no positive eigenvalue");
    const double cutoff = kNystromEigenCutoff * top;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        if (lambda(k) > cutoff) kept.push_back(k);
    }
    if (kept.empty()) throw SingularLandmarkBlock("every landmark eigenvalue fell below the cutoff");

    Eigen::MatrixXd factor(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
        factor.col(static_cast<Eigen::Index>(k)) =
            cross * eig.eigenvectors().col(kept[k]) / std::sqrt(lambda(kept[k]));
    }
    GramMatrix g{factor * factor.transpose(), model, params};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) g.values(i, j) = g.values(j, i);
    }
    return g;
}

// Landmarks drawn uniformly without replacement from a seeded generator.
inline GramMatrix nystrom_gram(std::span<const Fiber> fibers, KernelModel model, const KernelParams& params,
                               std::size_t landmarks, std::uint64_t seed, unsigned threads = 1) {
    if (landmarks < 1 || landmarks > fibers.size()) {
        throw InvalidArgument("landmark count must lie in [1, " + std::to_string(fibers.size()) + "], got " +
                              std::to_string(landmarks));
    }
    const auto chosen = sample_without_replacement(fibers.size(), landmarks, seed);
    return nystrom_gram_at(fibers, model, params, chosen, threads);
}

inline double kernel_distance(const Eigen::MatrixXd& q, std::size_t i, std::size_t j) {
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(j);
    if (a >= q.rows() || b >= q.rows()) throw InvalidArgument("kernel_distance index out of range");
    if (a == b) return 0.0;
    return std::sqrt(std::max(0.0, q(a, a) + q(b, b) - 2.0 * q(a, b)));
}

inline double kernel_distance(const GramMatrix& q, std::size_t i, std::size_t j) {
    return kernel_distance(q.values, i, j);
}

inline Eigen::MatrixXd kernel_distance_matrix(const Eigen::MatrixXd& q) {
    const Eigen::Index n = q.rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            d(i, j) = kernel_distance(q, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            d(j, i) = d(i, j);
        }
    }
    return d;
}

// Smallest over largest eigenvalue of a symmetric matrix.
inline double min_eigen_ratio(const Eigen::MatrixXd& q) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q, Eigen::EigenvaluesOnly);
    const auto& lambda = eig.eigenvalues();
    return lambda.minCoeff() / lambda.maxCoeff();
}

// lambda_min >= -tol * lambda_max.
inline bool is_psd(const Eigen::MatrixXd& q, double tol = 1e-8) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q, Eigen::EigenvaluesOnly);
    const auto& lambda = eig.eigenvalues();
    return lambda.minCoeff() >= -tol * std::max(lambda.maxCoeff(), 0.0);
}

}  // namespace fvarclust
