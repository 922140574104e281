#include "cpsmine/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cpsmine/error.hpp"
#include "cpsmine/util.hpp"

namespace cpsmine {

using nlohmann::json;

namespace {

constexpr double kMinDecrease = 1e-12;

int majority(const std::vector<std::pair<int, std::size_t>>& counts) {
    int best = 0;
    std::size_t best_n = 0;
    for (const auto& [label, n] : counts)  // ascending labels: strict > keeps the lower one
        if (n > best_n) {
            best = label;
            best_n = n;
        }
    return best;
}

double gini(std::span<const std::size_t> counts, std::size_t total) {
    if (total == 0) return 0.0;
    double s = 0.0;
    for (auto c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        s += p * p;
    }
    return 1.0 - s;
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
};

class Grower {
public:
    Grower(const Dataset& data, const std::vector<int>& classes, std::span<const std::size_t> pool,
           std::size_t budget, const ForestConfig& cfg, std::uint64_t seed,
           std::vector<double>* importance)
        : data_(data), pool_(pool.begin(), pool.end()), budget_(budget), cfg_(cfg), rng_(seed),
          importance_(importance) {
        for (std::size_t i = 0; i < classes.size(); ++i) class_index_[classes[i]] = i;
        classes_ = classes;
    }

    Tree grow(std::vector<std::size_t> sample) {
        Tree t;
        nodes_ = &t.nodes;
        build(std::move(sample), 0);
        return t;
    }

private:
    std::vector<std::size_t> class_counts(std::span<const std::size_t> idx) const {
        std::vector<std::size_t> c(classes_.size(), 0);
        for (auto i : idx) ++c[class_index_.at(data_.labels[i])];
        return c;
    }

    Split best_split(std::span<const std::size_t> idx, double parent_gini) {
        // random subspace: at least `budget_` features, more only while no
        // valid split has been found
        std::vector<std::size_t> order = pool_;
        for (std::size_t i = 0; i + 1 < order.size(); ++i)
            std::swap(order[i], order[i + uniform_index(rng_, order.size() - i)]);

        const std::size_t n = idx.size();
        const std::size_t k = classes_.size();
        Split best;
        std::vector<std::pair<double, std::size_t>> vals(n);
        std::vector<std::size_t> left(k), right(k);
        for (std::size_t tried = 0; tried < order.size(); ++tried) {
            if (tried >= budget_ && best.feature >= 0) break;
            const std::size_t f = order[tried];
            for (std::size_t j = 0; j < n; ++j)
                vals[j] = {data_.rows[idx[j]][f], class_index_.at(data_.labels[idx[j]])};
            std::sort(vals.begin(), vals.end());
            std::fill(left.begin(), left.end(), 0);
            std::fill(right.begin(), right.end(), 0);
            for (const auto& v : vals) ++right[v.second];
            for (std::size_t j = 0; j + 1 < n; ++j) {
                ++left[vals[j].second];
                --right[vals[j].second];
                if (vals[j].first == vals[j + 1].first) continue;
                const std::size_t nl = j + 1, nr = n - nl;
                if (nl < cfg_.min_leaf || nr < cfg_.min_leaf) continue;
                const double child = (static_cast<double>(nl) * gini(left, nl) +
                                      static_cast<double>(nr) * gini(right, nr)) /
                                     static_cast<double>(n);
                const double dec = parent_gini - child;
                if (dec > best.decrease + kMinDecrease || (best.feature < 0 && dec > kMinDecrease)) {
                    double mid = vals[j].first + (vals[j + 1].first - vals[j].first) / 2.0;
                    if (!(mid < vals[j + 1].first)) mid = vals[j].first;
                    best = {static_cast<int>(f), mid, dec};
                }
            }
        }
        return best;
    }

    int build(std::vector<std::size_t> idx, std::size_t depth) {
        const int id = static_cast<int>(nodes_->size());
        nodes_->emplace_back();
        const auto cc = class_counts(idx);
        TreeNode node;
        for (std::size_t c = 0; c < cc.size(); ++c)
            if (cc[c]) node.counts.emplace_back(classes_[c], cc[c]);
        node.prediction = majority(node.counts);
        node.impurity = gini(cc, idx.size());

        Split split;
        if (depth < cfg_.max_depth && idx.size() >= 2 * cfg_.min_leaf && node.impurity > 0.0)
            split = best_split(idx, node.impurity);
        if (split.feature < 0) {
            (*nodes_)[static_cast<std::size_t>(id)] = std::move(node);
            return id;
        }
        if (importance_)
            (*importance_)[static_cast<std::size_t>(split.feature)] +=
                split.decrease * static_cast<double>(idx.size());

        std::vector<std::size_t> l, r;
        for (auto i : idx)
            (data_.rows[i][static_cast<std::size_t>(split.feature)] <= split.threshold ? l : r).push_back(i);
        node.feature = split.feature;
        node.threshold = split.threshold;
        (*nodes_)[static_cast<std::size_t>(id)] = std::move(node);
        const int li = build(std::move(l), depth + 1);
        const int ri = build(std::move(r), depth + 1);
        (*nodes_)[static_cast<std::size_t>(id)].left = li;
        (*nodes_)[static_cast<std::size_t>(id)].right = ri;
        return id;
    }

    const Dataset& data_;
    std::vector<std::size_t> pool_;
    std::size_t budget_;
    const ForestConfig& cfg_;
    Rng rng_;
    std::vector<double>* importance_;
    std::map<int, std::size_t> class_index_;
    std::vector<int> classes_;
    std::vector<TreeNode>* nodes_ = nullptr;
};

Tree grow_tree(const Dataset& data, const std::vector<int>& classes,
               std::span<const std::size_t> pool, std::size_t n, std::size_t budget,
               const ForestConfig& cfg, std::uint64_t seed, std::vector<double>* importance) {
    Rng rng(seed);
    std::vector<std::size_t> sample(n);
    std::vector<std::uint32_t> in_bag(data.size(), 0);
    for (auto& s : sample) {
        s = uniform_index(rng, data.size());
        ++in_bag[s];
    }
    Grower g(data, classes, pool, budget, cfg, rng(), importance);
    Tree t = g.grow(std::move(sample));
    t.in_bag = std::move(in_bag);
    return t;
}

json node_to_json(const Forest& f, const Tree& t, int id) {
    const auto& n = t.nodes[static_cast<std::size_t>(id)];
    json counts = json::array();
    for (const auto& [label, c] : n.counts) counts.push_back({label, c});
    if (n.leaf()) return {{"label", n.prediction}, {"counts", counts}};
    return {{"feature", f.columns[static_cast<std::size_t>(n.feature)]},
            {"threshold", n.threshold},
            {"counts", counts},
            {"le", node_to_json(f, t, n.left)},
            {"gt", node_to_json(f, t, n.right)}};
}

int node_from_json(const json& j, const std::map<std::string, std::size_t>& col, Tree& t) {
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    TreeNode n;
    std::size_t total = 0;
    std::vector<std::size_t> cc;
    for (const auto& c : j.at("counts")) {
        n.counts.emplace_back(c.at(0).get<int>(), c.at(1).get<std::size_t>());
        cc.push_back(n.counts.back().second);
        total += cc.back();
    }
    n.impurity = gini(cc, total);
    if (j.contains("feature")) {
        const auto name = j.at("feature").get<std::string>();
        const auto it = col.find(name);
        if (it == col.end()) throw ParseError("forest references unknown column " + name);
        n.feature = static_cast<int>(it->second);
        n.threshold = j.at("threshold").get<double>();
        n.prediction = majority(n.counts);
        t.nodes[static_cast<std::size_t>(id)] = n;
        const int l = node_from_json(j.at("le"), col, t);
        const int r = node_from_json(j.at("gt"), col, t);
        t.nodes[static_cast<std::size_t>(id)].left = l;
        t.nodes[static_cast<std::size_t>(id)].right = r;
    } else {
        n.prediction = j.at("label").get<int>();
        t.nodes[static_cast<std::size_t>(id)] = n;
    }
    return id;
}

}  // namespace

int Tree::predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes[i].leaf())
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                         ? nodes[i].left
                                         : nodes[i].right);
    return nodes[i].prediction;
}

std::size_t Tree::depth() const {
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t best = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes[i].leaf()) {
            stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
        }
    }
    return best;
}

std::pair<int, double> Forest::classify(std::span<const double> row) const {
    if (row.size() != columns.size())
        throw ShapeError(fmt::format("row has {} values, forest expects {}", row.size(), columns.size()));
    if (trees.empty()) throw ShapeError("forest has no trees");
    std::map<int, std::size_t> votes;
    for (const auto& t : trees) ++votes[t.predict(row)];
    int best = votes.begin()->first;
    std::size_t best_n = 0;
    for (const auto& [label, n] : votes)
        if (n > best_n) {
            best = label;
            best_n = n;
        }
    return {best, static_cast<double>(best_n) / static_cast<double>(trees.size())};
}

json Forest::to_json() const {
    json j;
    j["format"] = "cpsmine-forest";
    j["schema_version"] = 1;
    j["columns"] = columns;
    j["classes"] = classes;
    std::vector<std::string> pool_names;
    for (auto p : pool) pool_names.push_back(columns[p]);
    j["pool"] = pool_names;
    j["sample_size"] = sample_size;
    j["feature_budget"] = feature_budget;
    j["trees"] = json::array();
    for (const auto& t : trees) j["trees"].push_back(node_to_json(*this, t, 0));
    return j;
}

Forest Forest::from_json(const json& j) {
    try {
        if (j.value("format", "") != "cpsmine-forest") throw ParseError("not a forest document");
        if (j.at("schema_version").get<int>() != 1) throw ParseError("unsupported forest version");
        Forest f;
        f.columns = j.at("columns").get<std::vector<std::string>>();
        f.classes = j.at("classes").get<std::vector<int>>();
        std::map<std::string, std::size_t> col;
        for (std::size_t i = 0; i < f.columns.size(); ++i) col[f.columns[i]] = i;
        for (const auto& name : j.at("pool")) f.pool.push_back(col.at(name.get<std::string>()));
        f.sample_size = j.at("sample_size").get<std::size_t>();
        f.feature_budget = j.at("feature_budget").get<std::size_t>();
        for (const auto& tj : j.at("trees")) {
            Tree t;
            node_from_json(tj, col, t);
            f.trees.push_back(std::move(t));
        }
        return f;
    } catch (const json::exception& e) {
        throw ParseError(std::string("forest: ") + e.what());
    } catch (const std::out_of_range&) {
        throw ParseError("forest pool references an unknown column");
    }
}

std::uint64_t Forest::hash() const { return fnv1a64(to_json().dump()); }

Forest train_forest(const Dataset& data, const ForestConfig& cfg) {
    if (cfg.trees == 0) throw ConfigError("forest needs at least one tree");
    if (cfg.max_depth == 0) throw ConfigError("max_depth must be >= 1");
    if (cfg.min_leaf == 0) throw ConfigError("min_leaf must be >= 1");
    if (!(cfg.keep_fraction > 0.0 && cfg.keep_fraction <= 1.0))
        throw ConfigError("keep_fraction must be in (0, 1]");
    const std::size_t m = data.size();
    const std::size_t x = data.columns.size();
    if (m < 2) throw DegenerateInput("forest training needs at least 2 rows");
    if (data.labels.size() != m) throw ShapeError("label count differs from row count");
    if (x == 0) throw ShapeError("training matrix has no columns");
    for (const auto& r : data.rows) {
        if (r.size() != x) throw ShapeError("training rows differ in length");
        for (double v : r)
            if (!std::isfinite(v)) throw DegenerateInput("non-finite training value");
    }
    if (cfg.sample_size && (*cfg.sample_size == 0 || *cfg.sample_size >= m))
        throw ConfigError(fmt::format("sample size n = {} must satisfy 0 < n < m = {}", *cfg.sample_size, m));
    if (cfg.feature_budget && (*cfg.feature_budget == 0 || *cfg.feature_budget >= x))
        throw ConfigError(fmt::format("feature budget x' = {} must satisfy 0 < x' < X = {}", *cfg.feature_budget, x));

    Forest f;
    f.columns = data.columns;
    f.classes = data.labels;
    std::sort(f.classes.begin(), f.classes.end());
    f.classes.erase(std::unique(f.classes.begin(), f.classes.end()), f.classes.end());
    f.sample_size = cfg.sample_size.value_or(
        std::max<std::size_t>(1, std::min(m - 1, static_cast<std::size_t>(std::ceil(0.7 * static_cast<double>(m))))));
    f.feature_budget = cfg.feature_budget.value_or(std::max<std::size_t>(
        1, std::min(x > 1 ? x - 1 : 1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x)))))));

    std::vector<std::size_t> all(x);
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::size_t> raw, kept;
    for (auto c : all) (cfg.protected_columns.count(data.columns[c]) ? kept : raw).push_back(c);

    if (cfg.pilot_trees > 0 && !raw.empty()) {
        f.importance.assign(x, 0.0);
        const std::uint64_t pilot_seed = derive_seed(cfg.seed, 0x70696c6f74ULL);
        for (std::size_t i = 0; i < cfg.pilot_trees; ++i)
            grow_tree(data, f.classes, all, f.sample_size, f.feature_budget, cfg,
                      derive_seed(pilot_seed, i), &f.importance);
        for (auto& v : f.importance) v /= static_cast<double>(cfg.pilot_trees);
        std::stable_sort(raw.begin(), raw.end(),
                         [&](std::size_t a, std::size_t b) { return f.importance[a] > f.importance[b]; });
        const auto keep = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(cfg.keep_fraction * static_cast<double>(raw.size()))));
        raw.resize(std::min(raw.size(), keep));
    }
    kept.insert(kept.end(), raw.begin(), raw.end());
    std::sort(kept.begin(), kept.end());
    f.pool = kept;

    for (std::size_t i = 0; i < cfg.trees; ++i)
        f.trees.push_back(grow_tree(data, f.classes, f.pool, f.sample_size, f.feature_budget, cfg,
                                    derive_seed(cfg.seed, i), nullptr));
    return f;
}

std::optional<double> oob_error(const Forest& forest, const Dataset& data) {
    std::size_t evaluated = 0, wrong = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
        std::map<int, std::size_t> votes;
        for (const auto& t : forest.trees)
            if (r < t.in_bag.size() && t.in_bag[r] == 0) ++votes[t.predict(data.rows[r])];
        if (votes.empty()) continue;
        int best = votes.begin()->first;
        std::size_t best_n = 0;
        for (const auto& [label, n] : votes)
            if (n > best_n) {
                best = label;
                best_n = n;
            }
        ++evaluated;
        if (best != data.labels[r]) ++wrong;
    }
    if (evaluated == 0) return std::nullopt;
    return static_cast<double>(wrong) / static_cast<double>(evaluated);
}

double accuracy(const Forest& forest, const Dataset& data) {
    if (data.size() == 0) return 0.0;
    std::size_t ok = 0;
    for (std::size_t r = 0; r < data.size(); ++r)
        if (forest.classify(data.rows[r]).first == data.labels[r]) ++ok;
    return static_cast<double>(ok) / static_cast<double>(data.size());
}

bool DecisionRule::matches(std::span<const double> row) const {
    return std::all_of(predicates.begin(), predicates.end(), [&](const auto& p) { return p.holds(row); });
}

std::string DecisionRule::str() const {
    std::string out;
    for (std::size_t i = 0; i < predicates.size(); ++i) {
        if (i) out += " and ";
        const auto& p = predicates[i];
        out += fmt::format("({} {} {})", p.feature, p.op == Comparator::LessEqual ? "<=" : ">",
                           format_double(p.threshold));
    }
    return out;
}

std::vector<DecisionRule> extract_rules(const Forest& forest, const Dataset& validation) {
    std::vector<DecisionRule> rules;
    for (std::size_t ti = 0; ti < forest.trees.size(); ++ti) {
        const auto& nodes = forest.trees[ti].nodes;
        std::vector<Predicate> path;
        // iterative DFS, left before right
        struct Frame {
            std::size_t node;
            std::size_t depth;
            std::optional<Predicate> edge;
        };
        std::vector<Frame> stack{{0, 0, std::nullopt}};
        while (!stack.empty()) {
            Frame fr = stack.back();
            stack.pop_back();
            path.resize(fr.depth > 0 ? fr.depth - 1 : 0);
            if (fr.edge) path.push_back(*fr.edge);
            const auto& n = nodes[fr.node];
            if (n.leaf()) {
                if (!path.empty()) rules.push_back({path, n.prediction, 0.0, 0, ti});
                continue;
            }
            const auto col = static_cast<std::size_t>(n.feature);
            Predicate le{forest.columns[col], col, Comparator::LessEqual, n.threshold};
            Predicate gt{forest.columns[col], col, Comparator::Greater, n.threshold};
            stack.push_back({static_cast<std::size_t>(n.right), fr.depth + 1, gt});
            stack.push_back({static_cast<std::size_t>(n.left), fr.depth + 1, le});
        }
    }
    std::vector<DecisionRule> kept;
    for (auto& r : rules) {
        std::size_t hit = 0;
        for (std::size_t i = 0; i < validation.size(); ++i) {
            if (!r.matches(validation.rows[i])) continue;
            ++r.coverage;
            if (validation.labels[i] == r.category) ++hit;
        }
        if (r.coverage == 0) continue;
        r.accuracy = static_cast<double>(hit) / static_cast<double>(r.coverage);
        kept.push_back(std::move(r));
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return std::tie(b.accuracy, b.coverage) < std::tie(a.accuracy, a.coverage);
    });
    return kept;
}

std::string write_rules_csv(std::span<const DecisionRule> rules) {
    std::string out = "rule,category,accuracy,coverage\n";
    for (const auto& r : rules)
        out += fmt::format("{},{},{},{}\n", csv_field(r.str()), r.category, format_double(r.accuracy),
                           r.coverage);
    return out;
}

}  // namespace cpsmine
