#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpsmine/cas.hpp"
#include "cpsmine/pae.hpp"
#include "cpsmine/tfp_tree.hpp"
#include "cpsmine/topology.hpp"

namespace cpsmine {

inline constexpr double kMaxWindow = 240.0;

// --- join ----------------------------------------------------------------------

struct JoinedPair {
    std::size_t cas = 0;  ///< index into the CAS list
    std::size_t pae = 0;  ///< index into the PAE list

    bool operator==(const JoinedPair&) const = default;
};

/// Pairs every CAS with every PAE that is reachable from the CAS's cyber
/// components and starts strictly after the CAS's last step.
std::vector<JoinedPair> join(std::span<const CyberAttackSequence> cas,
                             std::span<const PhysicalAttackEvent> pae, const TopologyMap& topo,
                             ReachPolicy policy = ReachPolicy::Direct);

// --- dynamic window ------------------------------------------------------------

struct WindowBucket {
    double t = 0.0;     ///< interval bucket, seconds
    std::size_t n = 0;  ///< occurrences

    bool operator==(const WindowBucket&) const = default;
};

/// Observed cyber-to-physical intervals per sequence type
/// ("s5^CE4 > s1^CE3 => e21^PE2"), bucketed upward to multiples of `width`.
class WindowStats {
public:
    explicit WindowStats(double width = 10.0);

    void add(const std::string& key, double delta_t);
    std::vector<WindowBucket> buckets(const std::string& key) const;
    const std::map<std::string, std::map<double, std::size_t>>& all() const { return data_; }
    double width() const { return width_; }

private:
    double width_;
    std::map<std::string, std::map<double, std::size_t>> data_;
};

struct DynamicWindow {
    double seconds = kMaxWindow;
    bool fallback = false;  ///< no history below the cap; the cap was used
};

/// kMaxWindow when delta_t >= kMaxWindow, otherwise sum(n t) / sum(n) over
/// the buckets; with no buckets falls back to kMaxWindow and sets the flag.
DynamicWindow dynamic_window(std::span<const WindowBucket> buckets, double delta_t);

/// "s5^CE4 > s1^CE3 => e21^PE2"
std::string sequence_key(std::span<const AttackStep> cyber, const Item& physical);

// --- attack database -------------------------------------------------------------

using AttackerStreams = std::map<std::string, std::vector<AttackStep>>;

/// Per attacker: the steps of all its CAS plus every PAE joined to one of
/// them, de-duplicated and sorted by (time, item).
AttackerStreams build_streams(std::span<const CyberAttackSequence> cas,
                              std::span<const PhysicalAttackEvent> pae,
                              std::span<const JoinedPair> pairs);

/// Cuts each stream into records. Cyber-to-cyber gaps merge while <= 240 s;
/// a cyber-to-physical gap merges while <= the record's dynamic window (240 s
/// everywhere when `stats` is null); a physical event closes its record.
AttackDatabase segment(const AttackerStreams& streams, const WindowStats* stats);

/// Intervals between the last cyber step and the physical event of every
/// record that has both.
WindowStats collect_window_stats(const AttackDatabase& ad, double width = 10.0);

/// Join, bootstrap segmentation, statistics, refined segmentation.
AttackDatabase build_attack_database(std::span<const CyberAttackSequence> cas,
                                     std::span<const PhysicalAttackEvent> pae,
                                     const TopologyMap& topo, ReachPolicy policy,
                                     double bucket_width = 10.0);

nlohmann::json to_json(const AttackRecord& r);
std::string write_attack_db_jsonl(const AttackDatabase& ad);

// --- mining ------------------------------------------------------------------------

struct AttackPattern {
    std::vector<Item> antecedent;
    Item consequent;
    double support = 0.0;
    double confidence = 0.0;
    std::size_t occurrences = 0;         ///< records containing the pattern
    std::size_t attackers = 0;           ///< attackers with such a record
    std::size_t antecedent_records = 0;  ///< records containing the antecedent

    std::string antecedent_str() const;  ///< "s5^CE4 > s1^CE3"
    std::string str() const;             ///< "[s5^CE4 > s1^CE3 => e21^PE2]"
    bool operator==(const AttackPattern&) const = default;
};

/// Whether `record` contains `seq` in order, judged by the first occurrence
/// of each item.
bool contains_in_order(const AttackRecord& record, std::span<const Item> seq);

struct TopologyPruning {
    const TopologyMap* topo = nullptr;
    ReachPolicy policy = ReachPolicy::Direct;
};

/// FP-growth over the tree, then an order pass against `ad`: each frequent
/// item set with one physical and at least one cyber item becomes one
/// candidate per distinct step order seen in its supporting records.
/// Support = attackers / all attackers, confidence = records with pattern /
/// records with antecedent. With pruning, branches whose cyber items cannot
/// reach the physical item are skipped. Sorted by confidence, support,
/// occurrences (descending), then rendering.
std::vector<AttackPattern> mine(const TfpTree& tree, const AttackDatabase& ad, double alpha,
                                double beta, const std::optional<TopologyPruning>& pruning = std::nullopt);

/// Columns antecedent,consequent,support,confidence,occurrences after a
/// "# schema_version: 1" line.
std::string write_patterns_csv(std::span<const AttackPattern> patterns);
/// One "[...] confidence 93.1%, support 97.5%" line per pattern.
std::string write_patterns_text(std::span<const AttackPattern> patterns);

}  // namespace cpsmine
