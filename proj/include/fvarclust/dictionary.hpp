#pragma once

// Kernelized dictionary learning with non-negative sparse coding.
//
// Fibers live implicitly in the RKHS defined by a Gram matrix Q. Atoms are
// non-negative combinations of fibers (columns of A, n x m) and every fiber
// is coded by a non-negative, S_max-sparse combination of atoms (columns of
// W, m x n). The cost
//
//   0.5 * sum_i ( Q_ii + w_i^T A^T Q A w_i - 2 Q(i,:) A w_i )
//
// is minimized by alternating kernel OMP coding of W with multiplicative
// updates of A. Everything is computed from Q alone.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fvarclust/error.hpp"
#include "fvarclust/gram.hpp"
#include "fvarclust/nnls.hpp"
#include "fvarclust/random.hpp"

namespace fvarclust {

struct Dictionary {
    Eigen::MatrixXd atoms;  // n x m, non-negative

    std::size_t fiber_count() const noexcept { return static_cast<std::size_t>(atoms.rows()); }
    std::size_t atom_count() const noexcept { return static_cast<std::size_t>(atoms.cols()); }
};

struct SparseCodes {
    Eigen::MatrixXd codes;  // m x n, non-negative, <= s_max non-zeros per column
    std::size_t s_max = 1;

    std::size_t atom_count() const noexcept { return static_cast<std::size_t>(codes.rows()); }
    std::size_t fiber_count() const noexcept { return static_cast<std::size_t>(codes.cols()); }
};

enum class AtomSeeding : std::uint8_t {
    Uniform,        // init_atoms: uniformly drawn distinct fibers
    KMeansPlusPlus  // D^2 sampling in the kernel-induced distance
};

struct FitConfig {
    std::size_t m = 1;
    std::size_t s_max = 1;
    std::size_t max_outer_iters = 50;
    std::size_t dict_update_iters = 10;
    double objective_tolerance = 1e-6;
    std::uint64_t seed = 0;
    AtomSeeding seeding = AtomSeeding::KMeansPlusPlus;
    // Independent seeded runs; the one with the lowest final objective wins.
    std::size_t restarts = 10;
    unsigned threads = 1;

    void validate() const {
        if (m < 1) throw InvalidArgument("m must be >= 1");
        if (s_max < 1 || s_max > m) throw InvalidArgument("s_max must lie in [1, m]");
        if (max_outer_iters < 1) throw InvalidArgument("max_outer_iters must be >= 1");
        if (dict_update_iters < 1) throw InvalidArgument("dict_update_iters must be >= 1");
        if (!(objective_tolerance > 0.0)) throw InvalidArgument("objective_tolerance must be > 0");
        if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
    }
};

struct FitResult {
    Dictionary dictionary;
    SparseCodes codes;
    std::vector<double> objective_trace;  // one entry per outer iteration
    std::size_t iterations_run = 0;
    std::size_t best_restart = 0;
};

// Correlations below this are treated as non-positive by kernel OMP.
inline constexpr double kCorrelationFloor = 1e-12;
// Denominator guard of the multiplicative atom update.
inline constexpr double kUpdateGuard = 1e-12;

namespace detail {

inline void check_dims(const Eigen::MatrixXd& q, const Dictionary& a) {
    if (q.rows() != q.cols()) throw DimensionMismatch("Gram matrix is not square");
    if (a.atoms.rows() != q.rows()) {
        throw DimensionMismatch("dictionary has " + std::to_string(a.atoms.rows()) + " rows, Gram has " +
                                std::to_string(q.rows()));
    }
}

inline void check_dims(const Eigen::MatrixXd& q, const Dictionary& a, const SparseCodes& w) {
    check_dims(q, a);
    if (w.codes.rows() != a.atoms.cols()) {
        throw DimensionMismatch("codes have " + std::to_string(w.codes.rows()) + " rows, dictionary has " +
                                std::to_string(a.atoms.cols()) + " atoms");
    }
    if (w.codes.cols() != q.rows()) {
        throw DimensionMismatch("codes have " + std::to_string(w.codes.cols()) + " columns, Gram has " +
                                std::to_string(q.rows()));
    }
}

inline double fiber_cost(double q_ii, const Eigen::MatrixXd& atom_gram, const Eigen::VectorXd& corr,
                         const Eigen::VectorXd& w) {
    return 0.5 * (q_ii + w.dot(atom_gram * w) - 2.0 * corr.dot(w));
}

// Greedy selection of the most positively correlated atom followed by NNLS
// on the support. atom_gram = A^T Q A, corr = (Q(i,:) A)^T.
inline Eigen::VectorXd kernel_omp(const Eigen::MatrixXd& atom_gram, const Eigen::VectorXd& corr, std::size_t s_max) {
    const Eigen::Index m = corr.size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    std::vector<Eigen::Index> support;
    std::vector<bool> selected(static_cast<std::size_t>(m), false);
    while (support.size() < s_max) {
        const Eigen::VectorXd residual_corr = corr - atom_gram * w;
        Eigen::Index best = -1;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (selected[static_cast<std::size_t>(j)]) continue;
            if (residual_corr(j) > kCorrelationFloor && (best < 0 || residual_corr(j) > residual_corr(best))) best = j;
        }
        if (best < 0) break;
        selected[static_cast<std::size_t>(best)] = true;
        support.push_back(best);

        const auto s = static_cast<Eigen::Index>(support.size());
        Eigen::MatrixXd sub(s, s);
        Eigen::VectorXd rhs(s);
        for (Eigen::Index a = 0; a < s; ++a) {
            rhs(a) = corr(support[a]);
            for (Eigen::Index b = 0; b < s; ++b) sub(a, b) = atom_gram(support[a], support[b]);
        }
        const Eigen::VectorXd ws = nnls_gram(sub, rhs);
        w.setZero();
        for (Eigen::Index a = 0; a < s; ++a) w(support[a]) = ws(a);
    }
    return w;
}

}  // namespace detail

// Per-fiber terms of objective(); they sum to objective().
inline Eigen::VectorXd fiber_costs(const Eigen::MatrixXd& q, const Dictionary& a, const SparseCodes& w) {
    detail::check_dims(q, a, w);
    const Eigen::MatrixXd qa = q * a.atoms;
    const Eigen::MatrixXd atom_gram = a.atoms.transpose() * qa;
    Eigen::VectorXd out(q.rows());
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        out(i) = detail::fiber_cost(q(i, i), atom_gram, qa.row(i).transpose(), w.codes.col(i));
    }
    return out;
}

inline double objective(const Eigen::MatrixXd& q, const Dictionary& a, const SparseCodes& w) {
    return fiber_costs(q, a, w).sum();
}

// m distinct uniformly drawn fibers, one one-hot column each.
inline Dictionary init_atoms(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (m > n) {
        throw MoreAtomsThanFibers("cannot initialise " + std::to_string(m) + " atoms from " + std::to_string(n) +
                                  " fibers");
    }
    const auto picks = sample_without_replacement(n, m, seed);
    Dictionary d{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m))};
    for (std::size_t j = 0; j < m; ++j) d.atoms(static_cast<Eigen::Index>(picks[j]), static_cast<Eigen::Index>(j)) = 1.0;
    return d;
}

// m distinct fibers by greedy kernel k-means++: at every step
// 2 + floor(ln m) candidates are drawn by D^2 sampling on the distance
// induced by q and the one that most lowers the total squared distance to
// the chosen set is kept. One one-hot column per chosen fiber.
inline Dictionary init_atoms_kmeanspp(const Eigen::MatrixXd& q, std::size_t m, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(q.rows());
    if (m > n) {
        throw MoreAtomsThanFibers("cannot initialise " + std::to_string(m) + " atoms from " + std::to_string(n) +
                                  " fibers");
    }
    const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(m)));
    std::mt19937_64 rng(seed);
    std::vector<bool> taken(n, false);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    Dictionary d{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m))};

    auto sq_dist = [&](std::size_t i, std::size_t j) {
        const double v = kernel_distance(q, i, j);
        return v * v;
    };
    // D^2 draw among untaken fibers; n when every untaken fiber has D = 0.
    auto draw = [&]() {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i] && nearest[i] > 0.0) total += nearest[i];
        }
        if (!(total > 0.0)) return n;
        const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
        double acc = 0.0;
        std::size_t last = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i] || !(nearest[i] > 0.0)) continue;
            acc += nearest[i];
            last = i;
            if (acc > target) break;
        }
        return last;
    };

    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    for (std::size_t j = 0;; ++j) {
        taken[pick] = true;
        d.atoms(static_cast<Eigen::Index>(pick), static_cast<Eigen::Index>(j)) = 1.0;
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], sq_dist(i, pick));
        if (j + 1 == m) break;

        std::size_t best = n;
        double best_potential = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < trials; ++t) {
            const std::size_t cand = draw();
            if (cand == n) break;
            double potential = 0.0;
            for (std::size_t i = 0; i < n; ++i) potential += std::min(nearest[i], sq_dist(i, cand));
            if (potential < best_potential) {
                best_potential = potential;
                best = cand;
            }
        }
        if (best == n) {
            // every remaining fiber coincides with a chosen one
            std::vector<std::size_t> free;
            for (std::size_t i = 0; i < n; ++i) {
                if (!taken[i]) free.push_back(i);
            }
            best = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
        }
        pick = best;
    }
    return d;
}

inline Eigen::VectorXd sparse_code_one(const Eigen::MatrixXd& q, const Dictionary& a, std::size_t i,
                                       std::size_t s_max) {
    detail::check_dims(q, a);
    if (static_cast<Eigen::Index>(i) >= q.rows()) throw InvalidArgument("fiber index out of range");
    const Eigen::MatrixXd qa = q * a.atoms;
    const Eigen::MatrixXd atom_gram = a.atoms.transpose() * qa;
    return detail::kernel_omp(atom_gram, qa.row(static_cast<Eigen::Index>(i)).transpose(), s_max);
}

inline SparseCodes sparse_code_all(const Eigen::MatrixXd& q, const Dictionary& a, std::size_t s_max,
                                   unsigned threads = 1) {
    detail::check_dims(q, a);
    const Eigen::MatrixXd qa = q * a.atoms;
    const Eigen::MatrixXd atom_gram = a.atoms.transpose() * qa;
    SparseCodes w{Eigen::MatrixXd::Zero(a.atoms.cols(), q.rows()), s_max};
    detail::parallel_rows(static_cast<std::size_t>(q.rows()), threads, [&](std::size_t i) {
        const auto col = static_cast<Eigen::Index>(i);
        w.codes.col(col) = detail::kernel_omp(atom_gram, qa.row(col).transpose(), s_max);
    });
    return w;
}

// A <- A .* (Q W^T) ./ (Q A W W^T), `iters` times. Negative numerators are
// clipped to zero and denominators below kUpdateGuard are raised to it.
inline Dictionary update_dictionary(const Eigen::MatrixXd& q, const Dictionary& a, const SparseCodes& w,
                                    std::size_t iters) {
    detail::check_dims(q, a, w);
    const Eigen::MatrixXd numer = (q * w.codes.transpose()).cwiseMax(0.0);
    const Eigen::MatrixXd wwt = w.codes * w.codes.transpose();
    Dictionary out = a;
    for (std::size_t it = 0; it < iters; ++it) {
        const Eigen::MatrixXd denom = (q * out.atoms * wwt).cwiseMax(kUpdateGuard);
        out.atoms = (out.atoms.array() * numer.array() / denom.array()).matrix();
    }
    return out;
}

// Scales every atom to unit RKHS norm and the matching code row by the
// inverse factor, leaving A * W unchanged. Atoms with zero norm are left.
inline void normalize_atoms(const Eigen::MatrixXd& q, Dictionary& a, SparseCodes& w) {
    detail::check_dims(q, a, w);
    const Eigen::MatrixXd qa = q * a.atoms;
    for (Eigen::Index j = 0; j < a.atoms.cols(); ++j) {
        const double norm2 = a.atoms.col(j).dot(qa.col(j));
        if (!(norm2 > 0.0)) continue;
        const double norm = std::sqrt(norm2);
        a.atoms.col(j) /= norm;
        w.codes.row(j) *= norm;
    }
}

namespace detail {

// Uniform positive floor added to freshly seeded atoms; multiplicative
// updates can never revive an exact zero.
inline double atom_floor(Eigen::Index n) { return 1e-2 / static_cast<double>(n); }

inline void seed_atom(Dictionary& a, Eigen::Index atom, Eigen::Index fiber) {
    a.atoms.col(atom).setConstant(atom_floor(a.atoms.rows()));
    a.atoms(fiber, atom) += 1.0;
}

// Atoms whose code row is all zero are replaced by the worst reconstructed
// fibers. Their code rows stay zero, so A * W is unchanged.
inline std::size_t reseed_dead_atoms(const Eigen::MatrixXd& q, Dictionary& a, const SparseCodes& w) {
    std::vector<Eigen::Index> dead;
    for (Eigen::Index j = 0; j < w.codes.rows(); ++j) {
        if ((w.codes.row(j).array() == 0.0).all()) dead.push_back(j);
    }
    if (dead.empty()) return 0;
    const Eigen::VectorXd costs = fiber_costs(q, a, w);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(costs.size()));
    for (Eigen::Index i = 0; i < costs.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return costs(x) > costs(y); });
    for (std::size_t k = 0; k < dead.size(); ++k) seed_atom(a, dead[k], order[k % order.size()]);
    return dead.size();
}

}  // namespace detail

namespace detail {

inline FitResult fit_once(const Eigen::MatrixXd& q, const FitConfig& config, std::uint64_t seed) {
    const Eigen::Index n = q.rows();
    const Dictionary onehot = config.seeding == AtomSeeding::Uniform
                                  ? init_atoms(static_cast<std::size_t>(n), config.m, seed)
                                  : init_atoms_kmeanspp(q, config.m, seed);
    FitResult result;
    result.dictionary = onehot;
    result.dictionary.atoms.array() += atom_floor(n);
    result.codes = SparseCodes{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(config.m), n), config.s_max};
    normalize_atoms(q, result.dictionary, result.codes);

    Dictionary& a = result.dictionary;
    SparseCodes& w = result.codes;
    for (std::size_t it = 0; it < config.max_outer_iters; ++it) {
        // Coding: kernel OMP per fiber, keeping the previous column when it
        // still reconstructs the fiber better under the current atoms.
        SparseCodes coded = sparse_code_all(q, a, config.s_max, config.threads);
        const Eigen::VectorXd new_cost = fiber_costs(q, a, coded);
        const Eigen::VectorXd old_cost = fiber_costs(q, a, w);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (new_cost(i) <= old_cost(i)) w.codes.col(i) = coded.codes.col(i);
        }

        a = update_dictionary(q, a, w, config.dict_update_iters);
        reseed_dead_atoms(q, a, w);
        normalize_atoms(q, a, w);

        const double value = objective(q, a, w);
        result.objective_trace.push_back(value);
        result.iterations_run = it + 1;
        if (result.objective_trace.size() >= 2) {
            const double prev = result.objective_trace[result.objective_trace.size() - 2];
            const double scale = std::max(std::abs(prev), std::numeric_limits<double>::min());
            if ((prev - value) / scale < config.objective_tolerance) break;
        }
    }
    return result;
}

}  // namespace detail

// Restart r is seeded with config.seed + r.
inline FitResult fit(const Eigen::MatrixXd& q, const FitConfig& config) {
    config.validate();
    if (q.rows() != q.cols()) throw DimensionMismatch("Gram matrix is not square");
    if (static_cast<std::size_t>(q.rows()) < config.m) {
        throw MoreAtomsThanFibers("m = " + std::to_string(config.m) + " exceeds the fiber count " +
                                  std::to_string(q.rows()));
    }
    FitResult best;
    for (std::size_t r = 0; r < config.restarts; ++r) {
        FitResult run = detail::fit_once(q, config, config.seed + r);
        run.best_restart = r;
        if (r == 0 || run.objective_trace.back() < best.objective_trace.back()) best = std::move(run);
    }
    return best;
}

inline FitResult fit(const GramMatrix& q, const FitConfig& config) { return fit(q.values, config); }

}  // namespace fvarclust
