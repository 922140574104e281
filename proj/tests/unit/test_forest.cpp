#include <gtest/gtest.h>

#include <random>

#include "cpsmine/error.hpp"
#include "cpsmine/forest.hpp"
#include "oracles.hpp"

using namespace cpsmine;

namespace {

/// Two classes separated along x0 + x1 = 0 with a margin; the rest is noise.
Dataset separable(std::uint64_t seed, std::size_t n, std::size_t noise_cols = 4) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    Dataset d;
    d.columns = {"R1-PM4:I", "R1-PM5:I"};
    for (std::size_t c = 0; c < noise_cols; ++c) d.columns.push_back("R2-noise" + std::to_string(c));
    while (d.rows.size() < n) {
        std::vector<double> row(d.columns.size());
        for (auto& v : row) v = u(rng);
        const double s = row[0] + row[1];
        if (std::abs(s) < 2.0) continue;
        d.rows.push_back(row);
        d.labels.push_back(s > 0 ? 7 : 13);
    }
    return d;
}

ForestConfig small(std::size_t trees = 15, std::uint64_t seed = 1) {
    ForestConfig c;
    c.trees = trees;
    c.seed = seed;
    c.protected_columns = {};
    return c;
}

Forest constant_forest(const std::vector<int>& votes, std::size_t cols = 3) {
    Forest f;
    for (std::size_t c = 0; c < cols; ++c) f.columns.push_back("c" + std::to_string(c));
    for (int v : votes) {
        Tree t;
        TreeNode leaf;
        leaf.prediction = v;
        leaf.counts = {{v, 1}};
        t.nodes.push_back(leaf);
        f.trees.push_back(t);
    }
    return f;
}

}  // namespace

TEST(Forest, SeparableTrainingAccuracy) {
    const auto d = separable(1, 200);
    const auto f = train_forest(d, small());
    EXPECT_EQ(accuracy(f, d), 1.0);
    EXPECT_EQ(f.trees.size(), 15u);
}

TEST(Forest, HeldOutAccuracy) {
    const auto f = train_forest(separable(2, 300), small(25));
    EXPECT_GE(accuracy(f, separable(3, 200)), 0.95);
}

TEST(Forest, SingleClassGivesLeaves) {
    auto d = separable(4, 30);
    std::fill(d.labels.begin(), d.labels.end(), 41);
    const auto f = train_forest(d, small(5));
    for (const auto& t : f.trees) {
        ASSERT_EQ(t.nodes.size(), 1u);
        EXPECT_EQ(t.nodes[0].prediction, 41);
    }
}

TEST(Forest, SameSeedBitIdentical) {
    const auto d = separable(5, 120);
    const auto a = train_forest(d, small(10, 9));
    const auto b = train_forest(d, small(10, 9));
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
    EXPECT_NE(a.hash(), train_forest(d, small(10, 10)).hash());
}

TEST(Forest, JsonRoundTrip) {
    const auto d = separable(6, 100);
    const auto f = train_forest(d, small(6));
    const auto g = Forest::from_json(f.to_json());
    EXPECT_EQ(g.hash(), f.hash());
    for (const auto& row : d.rows) EXPECT_EQ(g.classify(row), f.classify(row));
}

TEST(Forest, ConfigErrors) {
    const auto d = separable(7, 20);
    auto c = small();
    c.sample_size = 20;
    EXPECT_THROW(train_forest(d, c), ConfigError);
    c = small();
    c.feature_budget = d.columns.size();
    EXPECT_THROW(train_forest(d, c), ConfigError);
    c = small(0);
    EXPECT_THROW(train_forest(d, c), ConfigError);
    Dataset one = d;
    one.rows.resize(1);
    one.labels.resize(1);
    EXPECT_THROW(train_forest(one, small()), DegenerateInput);
}

TEST(Classify, UnanimousAndTie) {
    const auto all = constant_forest({21, 21, 21});
    EXPECT_EQ(all.classify(std::vector<double>(3)), std::make_pair(21, 1.0));
    const auto tie = constant_forest({13, 7, 13, 7});
    EXPECT_EQ(tie.classify(std::vector<double>(3)), std::make_pair(7, 0.5));
    EXPECT_THROW(tie.classify(std::vector<double>(2)), ShapeError);
}

TEST(ForestProperty, GiniDecreasesAtEverySplit) {
    const auto f = train_forest(separable(8, 150, 6), small(20));
    auto gini = [](const TreeNode& n) {
        double total = 0, sq = 0;
        for (const auto& [_, c] : n.counts) total += static_cast<double>(c);
        for (const auto& [_, c] : n.counts) sq += (c / total) * (c / total);
        return std::make_pair(1.0 - sq, total);
    };
    for (const auto& t : f.trees)
        for (const auto& n : t.nodes) {
            if (n.leaf()) continue;
            const auto [gp, np] = gini(n);
            const auto [gl, nl] = gini(t.nodes[n.left]);
            const auto [gr, nr] = gini(t.nodes[n.right]);
            EXPECT_LT((nl * gl + nr * gr) / np, gp);
            EXPECT_NEAR(gp, n.impurity, 1e-12);
        }
}

TEST(ForestProperty, DepthAndLeafLimits) {
    auto c = small(10);
    c.max_depth = 3;
    c.min_leaf = 5;
    const auto f = train_forest(separable(9, 200), c);
    for (const auto& t : f.trees) {
        EXPECT_LE(t.depth(), 3u);
        for (const auto& n : t.nodes) {
            if (!n.leaf()) continue;
            std::size_t rows = 0;
            for (const auto& [_, k] : n.counts) rows += k;
            EXPECT_GE(rows, 5u);
        }
    }
}

TEST(ForestProperty, ClassifyIsPure) {
    const auto f = train_forest(separable(10, 100), small(8));
    const auto d = separable(11, 50);
    for (const auto& row : d.rows) {
        const auto copy = row;
        EXPECT_EQ(f.classify(row), f.classify(copy));
    }
}

TEST(ForestProperty, OobErrorBoundedAndPlateaus) {
    const auto d = separable(12, 300);
    double previous = 1.0;
    for (std::size_t t : {5u, 20u, 60u}) {
        const auto e = oob_error(train_forest(d, small(t, 3)), d);
        ASSERT_TRUE(e);
        EXPECT_GE(*e, 0.0);
        EXPECT_LE(*e, 1.0);
        EXPECT_LE(*e, previous + 0.02);
        previous = *e;
    }
}

TEST(Rules, DepthOneTreeGivesComplementaryPair) {
    auto c = small(1);
    c.max_depth = 1;
    c.feature_budget = 5;
    const auto d = separable(13, 100);
    const auto f = train_forest(d, c);
    ASSERT_EQ(f.trees[0].nodes.size(), 3u);
    const auto rules = extract_rules(f, d);
    ASSERT_EQ(rules.size(), 2u);
    ASSERT_EQ(rules[0].predicates.size(), 1u);
    EXPECT_EQ(rules[0].predicates[0].column, rules[1].predicates[0].column);
    EXPECT_EQ(rules[0].predicates[0].threshold, rules[1].predicates[0].threshold);
    EXPECT_NE(rules[0].predicates[0].op, rules[1].predicates[0].op);
    EXPECT_EQ(rules[0].coverage + rules[1].coverage, d.size());
}

TEST(Rules, ScoresMatchFilterAndCount) {
    const auto f = train_forest(separable(14, 200), small(12));
    const auto v = separable(15, 150);
    const auto rules = extract_rules(f, v);
    ASSERT_FALSE(rules.empty());
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto o = oracle::score_rule(rules[i], v);
        EXPECT_EQ(rules[i].coverage, o.coverage);
        EXPECT_EQ(rules[i].accuracy, o.accuracy);
        EXPECT_GT(rules[i].coverage, 0u);
        if (i) EXPECT_GE(rules[i - 1].accuracy, rules[i].accuracy);
    }
}

TEST(Rules, PartitionPerTree) {
    const auto f = train_forest(separable(16, 200), small(6));
    const auto v = separable(17, 80);
    auto rules = extract_rules(f, v);
    for (std::size_t t = 0; t < f.trees.size(); ++t)
        for (const auto& row : v.rows) {
            std::size_t hits = 0;
            for (const auto& r : rules)
                if (r.tree == t && r.matches(row)) ++hits;
            EXPECT_EQ(hits, f.trees[t].nodes.size() == 1 ? 0u : 1u);
        }
}

TEST(Rules, RenderingAndCsv) {
    DecisionRule r;
    r.predicates = {{"R3-PM7:V", 0, Comparator::LessEqual, 130130.2713},
                    {"R2-PM6:I", 1, Comparator::Greater, 383.337036}};
    r.category = 24;
    r.accuracy = 0.978;
    r.coverage = 45;
    EXPECT_EQ(r.str(), "(R3-PM7:V <= 130130.2713) and (R2-PM6:I > 383.337036)");
    const std::vector<DecisionRule> rules = {r};
    const auto csv = write_rules_csv(rules);
    EXPECT_NE(csv.find("rule,category,accuracy,coverage"), std::string::npos);
    EXPECT_NE(csv.find(",24,0.978,45"), std::string::npos);
}
