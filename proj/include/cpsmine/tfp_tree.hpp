#pragma once

#include <compare>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cpsmine/topology.hpp"

namespace cpsmine {

/// A mining item: a signature ("s5") or scenario label ("e21") tagged with
/// the component it hit. The same signature on two components is two items.
struct Item {
    std::string label;
    ComponentId component;

    bool physical() const { return component.is_physical(); }
    std::string str() const { return label + "^" + component.str(); }  ///< "s5^CE4"

    auto operator<=>(const Item&) const = default;
};

struct AttackStep {
    Item item;
    double time = 0.0;

    bool operator==(const AttackStep&) const = default;
};

/// Steps of one attacker that belong together: time-ordered, at most one
/// physical event and, if present, last.
struct AttackRecord {
    std::string aid;
    std::vector<AttackStep> steps;

    bool contains(const Item& item) const;
    bool operator==(const AttackRecord&) const = default;
};

using AttackDatabase = std::vector<AttackRecord>;

/// Prefix tree over item ids. Each header entry chains every node of its
/// item through `next`; the header lists items in insertion rank order.
class FpTree {
public:
    struct Node {
        int item = -1;
        std::size_t count = 0;
        int parent = -1;
        int next = -1;
        std::map<int, int> children;
    };
    struct HeaderEntry {
        int item = -1;
        std::size_t count = 0;  ///< sum over the chain
        int head = -1;
        int tail = -1;
    };

    /// `rank` fixes the header order: item ids in descending priority.
    explicit FpTree(std::vector<int> rank = {});

    /// Inserts an already rank-ordered, duplicate-free path.
    void insert(const std::vector<int>& path, std::size_t count);

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<HeaderEntry>& header() const { return header_; }
    bool empty() const { return nodes_.size() == 1; }
    /// Sum of counts along the item's chain (0 for unknown items).
    std::size_t chain_count(int item) const;
    /// Prefix paths (root side first, item excluded) of every node of `item`
    /// with that node's count.
    std::vector<std::pair<std::vector<int>, std::size_t>> prefix_paths(int item) const;

private:
    std::vector<Node> nodes_;
    std::vector<HeaderEntry> header_;
    std::map<int, std::size_t> header_index_;
};

/// Topology-tagged FP-tree over an attack database. Item ids index `items`.
struct TfpTree {
    std::vector<Item> items;
    std::vector<std::size_t> attacker_support;  ///< attackers having a record with the item
    std::vector<std::size_t> record_support;    ///< records containing the item
    std::size_t total_attackers = 0;
    std::size_t total_records = 0;
    double alpha = 0.0;
    FpTree tree;

    int id(const Item& item) const;  ///< -1 when absent
    /// Items kept in the tree, in header order.
    std::vector<Item> frequent_items() const;
};

/// Keeps items whose attacker support (attackers / all attackers) is at
/// least alpha, orders them by attacker support, record support (both
/// descending), then item, and inserts every record's kept items as a path.
/// Throws ConfigError unless 0 < alpha <= 1.
TfpTree build_tree(const AttackDatabase& ad, double alpha);

}  // namespace cpsmine
