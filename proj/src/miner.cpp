#include "cpsmine/miner.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cpsmine/error.hpp"
#include "cpsmine/util.hpp"

namespace cpsmine {

using nlohmann::json;

std::vector<JoinedPair> join(std::span<const CyberAttackSequence> cas,
                             std::span<const PhysicalAttackEvent> pae, const TopologyMap& topo,
                             ReachPolicy policy) {
    std::vector<JoinedPair> out;
    for (std::size_t c = 0; c < cas.size(); ++c) {
        if (cas[c].steps.empty()) continue;
        std::vector<ComponentId> comps;
        for (const auto& s : cas[c].steps) comps.push_back(s.component);
        const double last = cas[c].steps.back().time;
        for (std::size_t p = 0; p < pae.size(); ++p)
            if (last < pae[p].start_time && topo.is_reachable(comps, pae[p].component, policy))
                out.push_back({c, p});
    }
    return out;
}

WindowStats::WindowStats(double width) : width_(width) {
    if (!(width > 0.0)) throw ConfigError("window bucket width must be > 0");
}

void WindowStats::add(const std::string& key, double delta_t) {
    const double t = std::max(width_, std::ceil(delta_t / width_) * width_);
    ++data_[key][t];
}

std::vector<WindowBucket> WindowStats::buckets(const std::string& key) const {
    std::vector<WindowBucket> out;
    if (auto it = data_.find(key); it != data_.end())
        for (const auto& [t, n] : it->second) out.push_back({t, n});
    return out;
}

DynamicWindow dynamic_window(std::span<const WindowBucket> buckets, double delta_t) {
    if (delta_t >= kMaxWindow) return {kMaxWindow, false};
    double num = 0.0, den = 0.0;
    for (const auto& b : buckets) {
        num += static_cast<double>(b.n) * b.t;
        den += static_cast<double>(b.n);
    }
    if (den == 0.0) return {kMaxWindow, true};
    return {num / den, false};
}

std::string sequence_key(std::span<const AttackStep> cyber, const Item& physical) {
    std::string key;
    for (std::size_t i = 0; i < cyber.size(); ++i) {
        if (i) key += " > ";
        key += cyber[i].item.str();
    }
    return key + " => " + physical.str();
}

AttackerStreams build_streams(std::span<const CyberAttackSequence> cas,
                              std::span<const PhysicalAttackEvent> pae,
                              std::span<const JoinedPair> pairs) {
    std::map<std::string, std::set<std::pair<double, Item>>> acc;
    for (const auto& c : cas)
        for (const auto& s : c.steps) acc[c.attacker].insert({s.time, Item{s.sig_name, s.component}});
    for (const auto& jp : pairs) {
        const auto& p = pae[jp.pae];
        acc[cas[jp.cas].attacker].insert({p.start_time, Item{p.item(), p.component}});
    }
    AttackerStreams out;
    for (const auto& [aid, steps] : acc) {
        auto& v = out[aid];
        for (const auto& [t, item] : steps) v.push_back({item, t});
    }
    return out;
}

AttackDatabase segment(const AttackerStreams& streams, const WindowStats* stats) {
    AttackDatabase ad;
    for (const auto& [aid, steps] : streams) {
        AttackRecord cur{aid, {}};
        auto close = [&] {
            if (!cur.steps.empty()) ad.push_back(std::move(cur));
            cur = AttackRecord{aid, {}};
        };
        for (const auto& s : steps) {
            if (!cur.steps.empty()) {
                const double gap = s.time - cur.steps.back().time;
                double w = kMaxWindow;
                if (s.item.physical() && stats) {
                    const auto dw = dynamic_window(stats->buckets(sequence_key(cur.steps, s.item)), gap);
                    if (dw.fallback)
                        spdlog::debug("no interval history for {}, using {} s",
                                      sequence_key(cur.steps, s.item), kMaxWindow);
                    w = dw.seconds;
                }
                if (gap > w) close();
            }
            cur.steps.push_back(s);
            if (s.item.physical()) close();
        }
        close();
    }
    return ad;
}

WindowStats collect_window_stats(const AttackDatabase& ad, double width) {
    WindowStats stats(width);
    for (const auto& r : ad) {
        if (r.steps.size() < 2 || !r.steps.back().item.physical()) continue;
        const auto cyber = std::span(r.steps).first(r.steps.size() - 1);
        stats.add(sequence_key(cyber, r.steps.back().item), r.steps.back().time - cyber.back().time);
    }
    return stats;
}

AttackDatabase build_attack_database(std::span<const CyberAttackSequence> cas,
                                     std::span<const PhysicalAttackEvent> pae,
                                     const TopologyMap& topo, ReachPolicy policy,
                                     double bucket_width) {
    const auto pairs = join(cas, pae, topo, policy);
    const auto streams = build_streams(cas, pae, pairs);
    const auto first = segment(streams, nullptr);
    const auto stats = collect_window_stats(first, bucket_width);
    return segment(streams, &stats);
}

json to_json(const AttackRecord& r) {
    json steps = json::array();
    for (const auto& s : r.steps)
        steps.push_back({{"item", s.item.label},
                         {"component", s.item.component.str()},
                         {"time", s.time},
                         {"kind", s.item.physical() ? "physical" : "cyber"}});
    return {{"schema_version", 1}, {"aid", r.aid}, {"steps", steps}};
}

std::string write_attack_db_jsonl(const AttackDatabase& ad) {
    std::string out;
    for (const auto& r : ad) out += to_json(r).dump() + "\n";
    return out;
}

std::string AttackPattern::antecedent_str() const {
    std::string out;
    for (std::size_t i = 0; i < antecedent.size(); ++i) {
        if (i) out += " > ";
        out += antecedent[i].str();
    }
    return out;
}

std::string AttackPattern::str() const { return "[" + antecedent_str() + " => " + consequent.str() + "]"; }

bool contains_in_order(const AttackRecord& record, std::span<const Item> seq) {
    std::size_t prev = 0;
    bool first = true;
    for (const auto& item : seq) {
        const auto it = std::find_if(record.steps.begin(), record.steps.end(),
                                     [&](const auto& s) { return s.item == item; });
        if (it == record.steps.end()) return false;
        const auto pos = static_cast<std::size_t>(it - record.steps.begin());
        if (!first && pos <= prev) return false;
        prev = pos;
        first = false;
    }
    return true;
}

namespace {

class Growth {
public:
    Growth(const TfpTree& t, std::size_t min_count, const std::optional<TopologyPruning>& pruning)
        : t_(t), min_count_(min_count), pruning_(pruning) {}

    void run() {
        std::vector<int> suffix;
        grow(t_.tree, suffix);
    }

    std::vector<std::vector<int>> itemsets;

private:
    const Item& item(int id) const { return t_.items[static_cast<std::size_t>(id)]; }

    /// No extension of `suffix` by items of `pool` can yield a reachable
    /// pattern.
    bool hopeless(const std::vector<int>& suffix, const std::vector<int>& pool) const {
        std::vector<const Item*> phys;
        for (int id : suffix)
            if (item(id).physical()) phys.push_back(&item(id));
        if (phys.size() > 1) return true;
        if (phys.empty() || !pruning_) return false;
        std::vector<ComponentId> cyber;
        for (const auto* ids : {&suffix, &pool})
            for (int id : *ids)
                if (!item(id).physical()) cyber.push_back(item(id).component);
        if (cyber.empty()) return true;
        return !pruning_->topo->is_reachable(cyber, phys.front()->component, pruning_->policy);
    }

    void grow(const FpTree& tree, std::vector<int>& suffix) {
        const auto& header = tree.header();
        for (auto h = header.rbegin(); h != header.rend(); ++h) {
            if (h->count < min_count_) continue;
            suffix.push_back(h->item);
            itemsets.push_back(suffix);

            const auto base = tree.prefix_paths(h->item);
            std::map<int, std::size_t> freq;
            for (const auto& [path, c] : base)
                for (int id : path) freq[id] += c;
            std::vector<int> keep;
            for (const auto& e : header)
                if (auto it = freq.find(e.item); it != freq.end() && it->second >= min_count_)
                    keep.push_back(e.item);
            if (!keep.empty() && !hopeless(suffix, keep)) {
                FpTree cond(keep);
                const std::set<int> kept(keep.begin(), keep.end());
                for (const auto& [path, c] : base) {
                    std::vector<int> p;
                    for (int id : path)
                        if (kept.count(id)) p.push_back(id);
                    if (!p.empty()) cond.insert(p, c);
                }
                grow(cond, suffix);
            }
            suffix.pop_back();
        }
    }

    const TfpTree& t_;
    std::size_t min_count_;
    const std::optional<TopologyPruning>& pruning_;
};

}  // namespace

std::vector<AttackPattern> mine(const TfpTree& tree, const AttackDatabase& ad, double alpha,
                                double beta, const std::optional<TopologyPruning>& pruning) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must be in [0, 1]");
    if (pruning && !pruning->topo) throw ConfigError("topology pruning without a topology");
    std::set<std::string> aid_set;
    for (const auto& r : ad) aid_set.insert(r.aid);
    const std::size_t attackers = aid_set.size();
    if (attackers == 0) return {};

    std::size_t min_count = 0;
    while (static_cast<double>(min_count) / static_cast<double>(attackers) < alpha) ++min_count;

    Growth g(tree, min_count, pruning);
    g.run();

    std::vector<AttackPattern> out;
    for (const auto& ids : g.itemsets) {
        std::vector<Item> cyber;
        std::optional<Item> phys;
        bool two_phys = false;
        for (int id : ids) {
            const auto& it = tree.items[static_cast<std::size_t>(id)];
            if (!it.physical())
                cyber.push_back(it);
            else if (phys)
                two_phys = true;
            else
                phys = it;
        }
        if (two_phys || !phys || cyber.empty()) continue;
        if (pruning) {
            std::vector<ComponentId> comps;
            for (const auto& c : cyber) comps.push_back(c.component);
            if (!pruning->topo->is_reachable(comps, phys->component, pruning->policy)) continue;
        }

        // order pass: one candidate per step order seen in supporting records
        std::set<std::vector<Item>> orders;
        for (const auto& r : ad) {
            std::vector<std::pair<std::size_t, Item>> pos;
            bool all = true;
            for (const auto& c : cyber) {
                const auto it = std::find_if(r.steps.begin(), r.steps.end(),
                                             [&](const auto& s) { return s.item == c; });
                if (it == r.steps.end()) {
                    all = false;
                    break;
                }
                pos.emplace_back(static_cast<std::size_t>(it - r.steps.begin()), c);
            }
            if (!all || !r.contains(*phys)) continue;
            std::sort(pos.begin(), pos.end());
            std::vector<Item> order;
            for (const auto& [_, c] : pos) order.push_back(c);
            orders.insert(std::move(order));
        }

        for (const auto& order : orders) {
            AttackPattern p{order, *phys, 0.0, 0.0, 0, 0, 0};
            std::vector<Item> full = order;
            full.push_back(*phys);
            std::set<std::string> who;
            for (const auto& r : ad) {
                if (!contains_in_order(r, order)) continue;
                ++p.antecedent_records;
                if (contains_in_order(r, full)) {
                    ++p.occurrences;
                    who.insert(r.aid);
                }
            }
            if (p.occurrences == 0) continue;
            p.attackers = who.size();
            p.support = static_cast<double>(p.attackers) / static_cast<double>(attackers);
            p.confidence = static_cast<double>(p.occurrences) / static_cast<double>(p.antecedent_records);
            if (p.support >= alpha && p.confidence >= beta) out.push_back(std::move(p));
        }
    }
    std::sort(out.begin(), out.end(), [](const AttackPattern& a, const AttackPattern& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.support != b.support) return a.support > b.support;
        if (a.occurrences != b.occurrences) return a.occurrences > b.occurrences;
        return a.str() < b.str();
    });
    return out;
}

std::string write_patterns_csv(std::span<const AttackPattern> patterns) {
    std::string out = "# schema_version: 1\nantecedent,consequent,support,confidence,occurrences\n";
    for (const auto& p : patterns)
        out += fmt::format("{},{},{:.6f},{:.6f},{}\n", csv_field(p.antecedent_str()),
                           csv_field(p.consequent.str()), p.support, p.confidence, p.occurrences);
    return out;
}

std::string write_patterns_text(std::span<const AttackPattern> patterns) {
    std::string out;
    for (const auto& p : patterns)
        out += fmt::format("{} confidence {:.1f}%, support {:.1f}%\n", p.str(), p.confidence * 100.0,
                           p.support * 100.0);
    return out;
}

}  // namespace cpsmine
