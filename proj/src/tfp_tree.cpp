#include "cpsmine/tfp_tree.hpp"

#include <algorithm>
#include <set>

#include "cpsmine/error.hpp"

namespace cpsmine {

bool AttackRecord::contains(const Item& item) const {
    return std::any_of(steps.begin(), steps.end(), [&](const auto& s) { return s.item == item; });
}

FpTree::FpTree(std::vector<int> rank) : nodes_(1) {
    for (int item : rank) {
        header_index_[item] = header_.size();
        header_.push_back({item, 0, -1, -1});
    }
}

void FpTree::insert(const std::vector<int>& path, std::size_t count) {
    int cur = 0;
    nodes_[0].count += count;
    for (int item : path) {
        const auto hit = header_index_.find(item);
        if (hit == header_index_.end()) throw ValidationError("item outside the tree's header");
        auto& children = nodes_[static_cast<std::size_t>(cur)].children;
        auto it = children.find(item);
        int child;
        if (it == children.end()) {
            child = static_cast<int>(nodes_.size());
            children.emplace(item, child);
            Node n;
            n.item = item;
            n.parent = cur;
            nodes_.push_back(std::move(n));
            auto& h = header_[hit->second];
            if (h.tail < 0)
                h.head = child;
            else
                nodes_[static_cast<std::size_t>(h.tail)].next = child;
            h.tail = child;
        } else {
            child = it->second;
        }
        nodes_[static_cast<std::size_t>(child)].count += count;
        header_[hit->second].count += count;
        cur = child;
    }
}

std::size_t FpTree::chain_count(int item) const {
    const auto it = header_index_.find(item);
    if (it == header_index_.end()) return 0;
    std::size_t s = 0;
    for (int n = header_[it->second].head; n >= 0; n = nodes_[static_cast<std::size_t>(n)].next)
        s += nodes_[static_cast<std::size_t>(n)].count;
    return s;
}

std::vector<std::pair<std::vector<int>, std::size_t>> FpTree::prefix_paths(int item) const {
    std::vector<std::pair<std::vector<int>, std::size_t>> out;
    const auto it = header_index_.find(item);
    if (it == header_index_.end()) return out;
    for (int n = header_[it->second].head; n >= 0; n = nodes_[static_cast<std::size_t>(n)].next) {
        std::vector<int> path;
        for (int p = nodes_[static_cast<std::size_t>(n)].parent; p > 0; p = nodes_[static_cast<std::size_t>(p)].parent)
            path.push_back(nodes_[static_cast<std::size_t>(p)].item);
        std::reverse(path.begin(), path.end());
        out.emplace_back(std::move(path), nodes_[static_cast<std::size_t>(n)].count);
    }
    return out;
}

int TfpTree::id(const Item& item) const {
    const auto it = std::find(items.begin(), items.end(), item);
    return it == items.end() ? -1 : static_cast<int>(it - items.begin());
}

std::vector<Item> TfpTree::frequent_items() const {
    std::vector<Item> out;
    for (const auto& h : tree.header()) out.push_back(items[static_cast<std::size_t>(h.item)]);
    return out;
}

TfpTree build_tree(const AttackDatabase& ad, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
    TfpTree t;
    t.alpha = alpha;
    t.total_records = ad.size();

    std::set<Item> all;
    std::set<std::string> aids;
    for (const auto& r : ad) {
        aids.insert(r.aid);
        for (const auto& s : r.steps) all.insert(s.item);
    }
    t.items.assign(all.begin(), all.end());
    t.total_attackers = aids.size();
    t.attacker_support.assign(t.items.size(), 0);
    t.record_support.assign(t.items.size(), 0);

    std::vector<std::set<std::string>> who(t.items.size());
    std::vector<std::vector<int>> record_items;
    for (const auto& r : ad) {
        std::vector<int> ids;
        for (const auto& s : r.steps) {
            const int id = static_cast<int>(std::lower_bound(t.items.begin(), t.items.end(), s.item) - t.items.begin());
            if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
        }
        for (int id : ids) {
            ++t.record_support[static_cast<std::size_t>(id)];
            who[static_cast<std::size_t>(id)].insert(r.aid);
        }
        record_items.push_back(std::move(ids));
    }
    std::vector<int> rank;
    for (std::size_t i = 0; i < t.items.size(); ++i) {
        t.attacker_support[i] = who[i].size();
        const double support = static_cast<double>(who[i].size()) / static_cast<double>(t.total_attackers);
        if (support >= alpha) rank.push_back(static_cast<int>(i));
    }
    std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) {
        const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
        return std::tie(t.attacker_support[ub], t.record_support[ub]) <
               std::tie(t.attacker_support[ua], t.record_support[ua]);
    });
    std::vector<std::size_t> pos(t.items.size(), SIZE_MAX);
    for (std::size_t i = 0; i < rank.size(); ++i) pos[static_cast<std::size_t>(rank[i])] = i;

    t.tree = FpTree(rank);
    for (auto& ids : record_items) {
        std::erase_if(ids, [&](int id) { return pos[static_cast<std::size_t>(id)] == SIZE_MAX; });
        std::sort(ids.begin(), ids.end(), [&](int a, int b) {
            return pos[static_cast<std::size_t>(a)] < pos[static_cast<std::size_t>(b)];
        });
        if (!ids.empty()) t.tree.insert(ids, 1);
    }
    return t;
}

}  // namespace cpsmine
