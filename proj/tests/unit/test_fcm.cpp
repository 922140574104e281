#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cpsmine/error.hpp"
#include "cpsmine/fcm.hpp"

using namespace cpsmine;

namespace {

using Vecs = std::vector<std::vector<double>>;

Vecs blobs(std::mt19937_64& rng, std::size_t per, const Vecs& means, double sigma) {
    std::normal_distribution<double> g(0.0, sigma);
    Vecs out;
    for (const auto& m : means)
        for (std::size_t i = 0; i < per; ++i) {
            auto v = m;
            for (auto& x : v) x += g(rng);
            out.push_back(v);
        }
    return out;
}

void expect_columns_sum_to_one(const FcmResult& r) {
    for (std::size_t k = 0; k < r.membership.cols; ++k) {
        double s = 0;
        for (std::size_t i = 0; i < r.membership.rows; ++i) {
            EXPECT_GE(r.membership(i, k), 0.0);
            EXPECT_LE(r.membership(i, k), 1.0);
            s += r.membership(i, k);
        }
        EXPECT_NEAR(s, 1.0, 1e-9);
    }
}

}  // namespace

TEST(Fcm, TwoSeparatedBlobs) {
    std::mt19937_64 rng(1);
    const Vecs means = {{0.0, 0.0}, {50.0, 50.0}};
    const auto x = blobs(rng, 20, means, 0.5);
    FcmParams p;
    p.clusters = 2;
    p.tolerance = 1e-12;
    p.max_iter = 1000;
    const auto r = fcm_cluster(x, p);
    const auto hard = hard_assignment(r);
    for (std::size_t b = 0; b < 2; ++b) {
        std::vector<double> mean(2, 0.0);
        for (std::size_t k = b * 20; k < b * 20 + 20; ++k)
            for (int d = 0; d < 2; ++d) mean[d] += x[k][d] / 20.0;
        const std::size_t c = hard[b * 20];
        for (int d = 0; d < 2; ++d) EXPECT_NEAR(r.centers(c, d), mean[d], 1e-3);
        for (std::size_t k = b * 20; k < b * 20 + 20; ++k) {
            EXPECT_EQ(hard[k], c);
            EXPECT_GT(r.membership(c, k), 0.95);
        }
    }
    EXPECT_NE(hard[0], hard[20]);
    expect_columns_sum_to_one(r);
}

TEST(Fcm, IdenticalVectorsSingleCluster) {
    const Vecs x(7, std::vector<double>{3.0, -1.0});
    FcmParams p;
    p.clusters = 1;
    const auto r = fcm_cluster(x, p);
    EXPECT_DOUBLE_EQ(r.centers(0, 0), 3.0);
    EXPECT_DOUBLE_EQ(r.centers(0, 1), -1.0);
    EXPECT_DOUBLE_EQ(r.objective_trace.back(), 0.0);
}

TEST(Fcm, OneCenterPerPointNearHardLimit) {
    const Vecs x = {{0.0}, {10.0}, {20.0}, {35.0}};
    FcmParams p;
    p.clusters = 4;
    p.fuzzifier = 1.05;
    p.tolerance = 1e-14;
    const auto r = fcm_cluster(x, p);
    EXPECT_LT(r.objective_trace.back(), 1e-6);
}

TEST(Fcm, Errors) {
    const Vecs x = {{0.0}, {0.0}, {1.0}};
    FcmParams p;
    p.clusters = 3;
    EXPECT_THROW(fcm_cluster(x, p), DegenerateInput);
    p.clusters = 0;
    EXPECT_THROW(fcm_cluster(x, p), ConfigError);
    p.clusters = 2;
    p.fuzzifier = 1.0;
    EXPECT_THROW(fcm_cluster(x, p), ConfigError);
    p.fuzzifier = 2.0;
    p.tolerance = 0.0;
    EXPECT_THROW(fcm_cluster(x, p), ConfigError);
    EXPECT_EQ(count_distinct(x), 2u);
}

TEST(Fcm, SameSeedSameResult) {
    std::mt19937_64 rng(4);
    const auto x = blobs(rng, 15, {{0, 0, 0}, {5, 5, 5}, {0, 9, 2}}, 1.0);
    FcmParams p;
    p.clusters = 3;
    p.seed = 99;
    const auto a = fcm_cluster(x, p);
    const auto b = fcm_cluster(x, p);
    EXPECT_EQ(a.centers.data, b.centers.data);
    EXPECT_EQ(a.membership.data, b.membership.data);
    EXPECT_EQ(a.objective_trace, b.objective_trace);
}

TEST(FcmProperty, ObjectiveNonIncreasingAndMembershipValid) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-20, 20);
    for (int trial = 0; trial < 40; ++trial) {
        Vecs x(10 + rng() % 60, std::vector<double>(1 + rng() % 4));
        for (auto& v : x)
            for (auto& e : v) e = u(rng);
        FcmParams p;
        p.clusters = 1 + rng() % 5;
        p.fuzzifier = 1.3 + static_cast<double>(rng() % 20) / 10.0;
        p.seed = static_cast<std::uint64_t>(trial);
        const auto r = fcm_cluster(x, p);
        for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
            EXPECT_LE(r.objective_trace[i], r.objective_trace[i - 1]) << "trial " << trial << " iter " << i;
        expect_columns_sum_to_one(r);
        // the closing membership update is optimal for the reported centers
        EXPECT_LE(fcm_objective(x, r.membership, r.centers, p.fuzzifier),
                  r.objective_trace.back() * (1.0 + 1e-12) + 1e-12);
    }
}
