#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace cpsmine {

/// Dense labeled table. Columns carry the "R#-Signal" style names used in
/// exported rules.
struct Dataset {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;

    std::size_t size() const { return rows.size(); }
};

struct ForestConfig {
    std::size_t trees = 88;                    ///< T
    std::optional<std::size_t> sample_size;    ///< n; default ceil(0.7 m), capped at m - 1
    std::optional<std::size_t> feature_budget; ///< x'; default ceil(sqrt(X)), capped at X - 1
    std::size_t max_depth = 12;
    std::size_t min_leaf = 2;
    std::uint64_t seed = 0;
    /// Trees in the importance pilot; 0 disables raw-feature pruning.
    std::size_t pilot_trees = 10;
    /// Fraction of raw (unprotected) columns kept after the pilot.
    double keep_fraction = 0.5;
    /// Columns always in the candidate pool.
    std::set<std::string> protected_columns = {"eta_U", "eta_I", "delta_I", "delta_U", "tau"};
};

struct TreeNode {
    int feature = -1;  ///< -1 for a leaf
    double threshold = 0.0;
    int left = -1;     ///< value <= threshold
    int right = -1;    ///< value > threshold
    std::vector<std::pair<int, std::size_t>> counts;  ///< class -> bootstrap rows reaching the node
    int prediction = 0;
    double impurity = 0.0;  ///< Gini

    bool leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root
    std::vector<std::uint32_t> in_bag;  ///< bootstrap multiplicity per training row

    int predict(std::span<const double> row) const;
    std::size_t depth() const;
};

/// Random forest of CART trees grown on bootstrap samples with Gini splits.
class Forest {
public:
    std::vector<std::string> columns;
    std::vector<int> classes;          ///< ascending
    std::vector<std::size_t> pool;     ///< candidate column indices after pruning
    std::vector<double> importance;    ///< pilot importance per column (empty without pilot)
    std::vector<Tree> trees;
    std::size_t sample_size = 0;
    std::size_t feature_budget = 0;

    /// Plurality vote; ties go to the lower label. Throws ShapeError.
    std::pair<int, double> classify(std::span<const double> row) const;

    /// Versioned JSON; trees as nested split/leaf objects.
    nlohmann::json to_json() const;
    static Forest from_json(const nlohmann::json& j);
    /// FNV-1a over the serialized form.
    std::uint64_t hash() const;
};

/// Throws ConfigError when an explicit n >= m or x' >= X, T == 0, min_leaf
/// == 0, max_depth == 0 or keep_fraction is outside (0, 1]; DegenerateInput
/// with fewer than 2 rows; ShapeError on ragged rows.
Forest train_forest(const Dataset& data, const ForestConfig& cfg);

/// Fraction of rows misclassified by the trees that did not see them;
/// nullopt when no row is out of bag anywhere.
std::optional<double> oob_error(const Forest& forest, const Dataset& data);

double accuracy(const Forest& forest, const Dataset& data);

enum class Comparator { LessEqual, Greater };

struct Predicate {
    std::string feature;
    std::size_t column = 0;
    Comparator op = Comparator::LessEqual;
    double threshold = 0.0;

    bool holds(std::span<const double> row) const {
        return op == Comparator::LessEqual ? row[column] <= threshold : row[column] > threshold;
    }
};

struct DecisionRule {
    std::vector<Predicate> predicates;
    int category = 0;
    double accuracy = 0.0;
    std::size_t coverage = 0;  ///< validation rows satisfying every predicate
    std::size_t tree = 0;

    bool matches(std::span<const double> row) const;
    /// "(R3-PM7:V <= 130130.2713) and (R2-PM6:I <= 383.337036)"
    std::string str() const;
};

/// One rule per root-to-leaf path of every tree, scored on `validation`.
/// Rules without predicates or without covered rows are dropped. Sorted by
/// accuracy, then coverage, descending; stable in (tree, path) order.
std::vector<DecisionRule> extract_rules(const Forest& forest, const Dataset& validation);

/// Columns: rule,category,accuracy,coverage.
std::string write_rules_csv(std::span<const DecisionRule> rules);

}  // namespace cpsmine
