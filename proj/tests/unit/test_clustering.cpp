#include <gtest/gtest.h>

#include <random>

#include "../support/oracles.hpp"
#include "phenomine/clustering.hpp"
#include "phenomine/error.hpp"

using namespace phenomine;

TEST(Metrics, ExhaustiveSmallPartitions) {
    for (int n = 2; n <= 6; ++n) {
        const auto parts = oracle::set_partitions(n);
        for (const auto& a : parts) {
            for (const auto& b : parts) {
                ASSERT_NEAR(adjusted_rand_index(a, b), oracle::ari(a, b), 1e-12);
                ASSERT_NEAR(fowlkes_mallows_index(a, b), oracle::fmi(a, b), 1e-12);
                ASSERT_NEAR(normalized_mutual_information(a, b), oracle::nmi(a, b), 1e-12);
            }
        }
    }
}

TEST(Metrics, LabelPermutationInvariant) {
    std::vector<int> t = {0, 0, 1, 1, 2, 2, 2};
    std::vector<int> p = {5, 5, 9, 1, 1, 1, 9};
    std::vector<int> q = {0, 0, 7, 3, 3, 3, 7};
    EXPECT_DOUBLE_EQ(adjusted_rand_index(t, p), adjusted_rand_index(t, q));
    EXPECT_DOUBLE_EQ(normalized_mutual_information(t, p), normalized_mutual_information(t, q));
}

TEST(Metrics, WorkedExample) {
    std::vector<int> t = {0, 0, 0, 1, 1, 1};
    std::vector<int> p = {0, 0, 1, 1, 2, 2};
    EXPECT_NEAR(adjusted_rand_index(t, p), oracle::ari(t, p), 1e-12);
    EXPECT_NEAR(adjusted_rand_index(t, p), 0.24242424242424243, 1e-12);
    EXPECT_NEAR(fowlkes_mallows_index(t, p), 0.47140452079103173, 1e-12);
}

TEST(Metrics, LengthMismatchRejected) {
    std::vector<int> a = {0, 1}, b = {0};
    EXPECT_THROW(adjusted_rand_index(a, b), ParameterError);
}

TEST(KMeans, SeparableBlobs) {
    std::vector<std::vector<double>> rows;
    std::vector<int> truth;
    for (int i = 0; i < 10; ++i) {
        rows.push_back({0.0 + 0.01 * i, 0.0});
        truth.push_back(0);
    }
    for (int i = 0; i < 10; ++i) {
        rows.push_back({10.0 + 0.01 * i, 10.0});
        truth.push_back(1);
    }
    auto pts = Points::from_rows(rows);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto r = evaluate_clustering(pts, truth, 2, seed);
        EXPECT_DOUBLE_EQ(r.ari, 1.0);
        EXPECT_EQ(r.cluster_sizes, (std::vector<std::size_t>{10, 10}));
    }
}

TEST(KMeans, DeterministicAndMonotone) {
    std::mt19937 rng(5);
    std::bernoulli_distribution bit(0.3);
    std::vector<std::vector<double>> rows(80, std::vector<double>(12));
    for (auto& r : rows)
        for (auto& v : r) v = bit(rng);
    auto pts = Points::from_rows(rows);
    KMeansOptions o;
    o.k = 3;
    o.seed = 42;
    auto a = kmeans_fit(pts, o);
    auto b = kmeans_fit(pts, o);
    EXPECT_EQ(a.assignments, b.assignments);
    EXPECT_EQ(a.inertia, b.inertia);
    for (std::size_t i = 1; i < a.inertia_history.size(); ++i)
        EXPECT_LE(a.inertia_history[i], a.inertia_history[i - 1] + 1e-9);
}

TEST(KMeans, TooManyClusters) {
    auto pts = Points::from_rows({{0.0}, {1.0}});
    KMeansOptions o;
    o.k = 3;
    EXPECT_THROW(kmeans_fit(pts, o), ParameterError);
}

TEST(Labels, Schemes) {
    FeatureMatrix m;
    m.rows = {{"a", "a", Cohort::CN}, {"b", "b", Cohort::MCI}, {"c", "c", Cohort::ADRD}};
    EXPECT_EQ(truth_labels(m, LabelScheme::ThreeWay), (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(truth_labels(m, LabelScheme::CollapsedPatient), (std::vector<int>{0, 1, 1}));
    EXPECT_EQ(parse_label_scheme("three_way"), LabelScheme::ThreeWay);
    EXPECT_THROW(parse_label_scheme("bogus"), ConfigError);
}
