#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fvarclust/evaluation.hpp"
#include "support/oracles.hpp"

using namespace fvarclust;

namespace {

ClusterAssignment labels_of(std::vector<int> labels) {
    ClusterAssignment a;
    int top = -1;
    for (int l : labels) top = std::max(top, l);
    a.labels = std::move(labels);
    a.cluster_count = static_cast<std::size_t>(top + 1);
    return a;
}

std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n, int k) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    std::vector<int> out(n);
    for (auto& l : out) l = pick(rng);
    return out;
}

}  // namespace

TEST(HardAssign, OneHotColumns) {
    SparseCodes w{Eigen::MatrixXd::Zero(4, 5), 1};
    const int hot[] = {3, 0, 2, 2, 1};
    for (int i = 0; i < 5; ++i) w.codes(hot[i], i) = 0.5 + i;
    const auto a = hard_assign(w);
    EXPECT_EQ(a.labels, (std::vector<int>{3, 0, 2, 2, 1}));
    EXPECT_EQ(a.cluster_count, 4u);
    EXPECT_EQ(a.source, AssignmentSource::ArgmaxOfCodes);
}

TEST(HardAssign, TiesGoToLowestAtom) {
    SparseCodes w{Eigen::MatrixXd::Zero(6, 1), 2};
    w.codes(2, 0) = 0.7;
    w.codes(5, 0) = 0.7;
    EXPECT_EQ(hard_assign(w).labels[0], 2);
}

TEST(HardAssign, ZeroColumnIsUnassigned) {
    SparseCodes w{Eigen::MatrixXd::Zero(3, 3), 1};
    w.codes(1, 0) = 1.0;
    w.codes(2, 2) = 1.0;
    const auto a = hard_assign(w);
    EXPECT_EQ(a.labels, (std::vector<int>{1, kUnassigned, 2}));
    EXPECT_EQ(a.unassigned_count(), 1u);
}

TEST(HardAssign, MatchesNaiveScanAndIgnoresColumnScale) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
        SparseCodes w{oracle::random_nonneg(rng, 5, 12, 0.4), 5};
        const auto a = hard_assign(w);
        for (Eigen::Index i = 0; i < 12; ++i) {
            int want = kUnassigned;
            double best = 0.0;
            for (Eigen::Index j = 0; j < 5; ++j) {
                if (w.codes(j, i) > best) {
                    best = w.codes(j, i);
                    want = static_cast<int>(j);
                }
            }
            EXPECT_EQ(a.labels[static_cast<std::size_t>(i)], want);
        }
        SparseCodes scaled = w;
        scaled.codes.col(3) *= 17.0;
        scaled.codes.col(7) *= 0.01;
        EXPECT_EQ(hard_assign(scaled).labels, a.labels);
    }
}

TEST(Silhouette, TwoPointClusters) {
    // Fibers 0-2 identical, fibers 3-5 identical, orthogonal across.
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(6, 6);
    q.topLeftCorner(3, 3).setOnes();
    q.bottomRightCorner(3, 3).setOnes();
    const auto r = silhouette(q, labels_of({0, 0, 0, 1, 1, 1}));
    for (double s : r.per_fiber) EXPECT_EQ(s, 1.0);
    EXPECT_EQ(r.mean, 1.0);
    ASSERT_EQ(r.per_cluster.size(), 2u);
    EXPECT_EQ(r.per_cluster[1].size, 3u);
}

TEST(Silhouette, SingletonScoresZero) {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd q = oracle::random_psd(rng, 5);
    const auto r = silhouette(q, labels_of({0, 0, 1, 0, 0}));
    EXPECT_EQ(r.per_fiber[2], 0.0);
    EXPECT_EQ(r.per_cluster[1].mean, 0.0);
}

TEST(Silhouette, MatchesBruteForceOracle) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 30; ++t) {
        const auto n = std::uniform_int_distribution<std::size_t>(3, 30)(rng);
        const Eigen::MatrixXd q = oracle::random_psd(rng, static_cast<Eigen::Index>(n));
        auto labels = random_labels(rng, n, 4);
        labels[0] = 0;
        labels[1] = 1;
        std::vector<double> want;
        const double mean = oracle::brute_silhouette_mean(q, labels, &want);
        const auto r = silhouette(q, labels_of(labels));
        EXPECT_NEAR(r.mean, mean, 1e-12);
        ASSERT_EQ(r.per_fiber.size(), want.size());
        for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(r.per_fiber[i], want[i], 1e-12);
    }
}

TEST(Silhouette, RandomLabelsOnStructurelessGramNearZero) {
    std::mt19937_64 rng(4);
    double total = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::MatrixXd x(40, 5);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
        const Eigen::MatrixXd q = x * x.transpose();
        const double mean = silhouette(q, labels_of(random_labels(rng, 40, 3))).mean;
        EXPECT_LT(std::abs(mean), 0.1);
        total += mean;
    }
    EXPECT_LT(std::abs(total / 20.0), 0.1);
}

TEST(Silhouette, UnassignedFibersExcluded) {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd q = oracle::random_psd(rng, 8);
    const std::vector<int> labels{0, 1, kUnassigned, 0, 1, kUnassigned, 1, 0};
    const auto r = silhouette(q, labels_of(labels));
    EXPECT_EQ(r.unassigned, 2u);
    EXPECT_EQ(r.per_fiber.size(), 6u);
    EXPECT_EQ(std::find(r.fibers.begin(), r.fibers.end(), 2u), r.fibers.end());
    EXPECT_NEAR(r.mean, oracle::brute_silhouette_mean(q, labels), 1e-12);
}

TEST(Silhouette, InvariantUnderRelabeling) {
    std::mt19937_64 rng(6);
    const Eigen::MatrixXd q = oracle::random_psd(rng, 15);
    auto labels = random_labels(rng, 15, 3);
    labels[0] = 0;
    labels[1] = 1;
    labels[2] = 2;
    std::vector<int> renamed;
    for (int l : labels) renamed.push_back((l + 1) % 3 + 5);
    EXPECT_NEAR(silhouette(q, labels_of(labels)).mean, silhouette(q, labels_of(renamed)).mean, 1e-15);
}

TEST(Silhouette, ValuesInRange) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 10; ++t) {
        const Eigen::MatrixXd q = oracle::random_psd(rng, 20);
        auto labels = random_labels(rng, 20, 3);
        labels[0] = 0;
        labels[1] = 1;
        const auto r = silhouette(q, labels_of(labels));
        for (double s : r.per_fiber) {
            EXPECT_GE(s, -1.0);
            EXPECT_LE(s, 1.0);
        }
    }
}

TEST(Silhouette, Errors) {
    const Eigen::MatrixXd q = Eigen::MatrixXd::Identity(4, 4);
    EXPECT_THROW(silhouette(q, labels_of({0, 0, 0, 0})), SingleClusterInput);
    EXPECT_THROW(silhouette(q, labels_of({0, kUnassigned, kUnassigned, kUnassigned})), SingleClusterInput);
    EXPECT_THROW(silhouette(q, labels_of({0, 1, 0})), DimensionMismatch);
}

TEST(AdjustedRandIndex, IdenticalPartitions) {
    const auto a = labels_of({0, 0, 1, 1, 2, 2, 2});
    EXPECT_EQ(adjusted_rand_index(a, a), 1.0);
    EXPECT_DOUBLE_EQ(adjusted_rand_index(a, labels_of({4, 4, 0, 0, 1, 1, 1})), 1.0);
}

TEST(AdjustedRandIndex, SingleBlockVersusNonTrivial) {
    EXPECT_EQ(adjusted_rand_index(labels_of({0, 0, 0, 0, 0, 0}), labels_of({0, 1, 0, 2, 1, 1})), 0.0);
    EXPECT_EQ(adjusted_rand_index(labels_of({0, 0, 0}), labels_of({0, 0, 0})), 1.0);
}

TEST(AdjustedRandIndex, MatchesContingencyOracle) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 200; ++t) {
        const auto n = std::uniform_int_distribution<std::size_t>(2, 12)(rng);
        const auto x = random_labels(rng, n, std::uniform_int_distribution<int>(1, 4)(rng));
        const auto y = random_labels(rng, n, std::uniform_int_distribution<int>(1, 4)(rng));
        EXPECT_NEAR(adjusted_rand_index(labels_of(x), labels_of(y)), oracle::contingency_ari(x, y), 1e-12);
    }
}

TEST(AdjustedRandIndex, LengthMismatchThrows) {
    EXPECT_THROW(adjusted_rand_index(labels_of({0, 1}), labels_of({0, 1, 1})), LengthMismatch);
}

TEST(PlantedAssignment, RejectsNegativeLabels) {
    EXPECT_THROW(planted_assignment({0, -1}), InvalidArgument);
    const auto p = planted_assignment({2, 0, 1});
    EXPECT_EQ(p.cluster_count, 3u);
    EXPECT_EQ(p.source, AssignmentSource::Planted);
}
