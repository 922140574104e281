#pragma once

#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cpsmine/alarm.hpp"
#include "cpsmine/topology.hpp"

namespace cpsmine {

struct AlarmNode {
    std::string label;
    std::optional<double> prior;
};

/// A candidate attack-sequence template; `parents` lists the alarm labels in
/// the order the steps are expected to occur.
struct SequenceNode {
    std::string label;
    std::vector<std::string> parents;
};

/// Two-layer causal network: alarm nodes -> sequence nodes, each edge with an
/// activation probability (0 means the edge is switched off). Immutable.
class CausalNetwork {
public:
    using EdgeKey = std::pair<std::string, std::string>;  // (alarm, sequence)

    CausalNetwork() = default;
    /// Throws ValidationError when an edge leaves the alarm layer, a parent
    /// has no edge, a probability is out of range, or a label repeats.
    CausalNetwork(std::vector<AlarmNode> alarms, std::vector<SequenceNode> sequences,
                  std::map<EdgeKey, double> edges, double leak = 0.0);

    const std::vector<AlarmNode>& alarms() const { return alarms_; }
    const std::vector<SequenceNode>& sequences() const { return sequences_; }
    double leak() const { return leak_; }

    /// Throws UnknownNode.
    const SequenceNode& sequence(const std::string& label) const;
    double activation(const std::string& alarm, const std::string& sequence) const;
    /// Throws ConfigError when the alarm has no prior assigned.
    double prior(const std::string& alarm) const;
    bool has_prior(const std::string& alarm) const;

    /// Copy with every missing prior taken from `defaults` (missing there too
    /// leaves it unset).
    CausalNetwork with_default_priors(const std::map<std::string, double>& defaults) const;

    static CausalNetwork from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

private:
    std::vector<AlarmNode> alarms_;
    std::vector<SequenceNode> sequences_;
    std::map<EdgeKey, double> edges_;
    std::map<std::string, std::size_t> alarm_index_;
    std::map<std::string, std::size_t> sequence_index_;
    double leak_ = 0.0;
};

CausalNetwork load_network(const std::filesystem::path& path);

enum class Sign { Absent, Present };

/// One sign assignment over the parents of a sequence node, parents sorted by
/// label.
struct FuzzySubset {
    std::string sequence;
    std::vector<std::pair<std::string, Sign>> assignment;

    std::size_t present_count() const;
    std::vector<std::string> present() const;
    std::string str() const;  ///< e.g. "(s1+, s2-)"
};

/// All 2^p sign assignments over the target's parents, minus those marking
/// an unobserved alarm present. Binary counting order, first parent most
/// significant, 0 = absent. Throws UnknownNode.
std::vector<FuzzySubset> enumerate_subsets(const CausalNetwork& net,
                                           const std::set<std::string>& observed,
                                           const std::string& target);

inline constexpr double kProbabilityClamp = 1e-12;

/// Noisy-OR activation of the sequence node given the present parents:
/// 1 - (1 - leak) * prod (1 - K[edge]). Not clamped.
double noisy_or(const CausalNetwork& net, const FuzzySubset& subset);

/// prod_{present} pi * prod_{absent} (1 - pi) * delta, every factor clamped
/// into [eps, 1 - eps].
double unnormalized_score(const CausalNetwork& net, const FuzzySubset& subset);

/// Scores normalized to sum to one across `subsets` (all for one target).
std::vector<double> credibility(const CausalNetwork& net, std::span<const FuzzySubset> subsets);

/// Credibility of `subset` normalized over all 2^p assignments of its target.
double credibility(const CausalNetwork& net, const FuzzySubset& subset);

// --- recognition -------------------------------------------------------------

using AttackerGroups = std::map<std::string, std::vector<AlarmEvent>>;

/// Partitions events by src_ip; each group sorted by (time, cid).
AttackerGroups group_by_attacker(std::span<const AlarmEvent> events);

/// Fraction of attacker groups in which each signature occurs.
std::map<std::string, double> empirical_priors(const AttackerGroups& groups);

struct CasStep {
    std::string sig_name;
    ComponentId component;
    double time = 0.0;

    bool operator==(const CasStep&) const = default;
};

struct CyberAttackSequence {
    std::string attacker;
    std::string sequence;  ///< template label the sequence was recognized against
    std::vector<CasStep> steps;
    double credibility = 0.0;

    bool operator==(const CyberAttackSequence&) const = default;
};

struct RecognizeOptions {
    double min_credibility = 0.5;
    /// Events of one attacker further apart than this start a new session;
    /// each session is recognized on its own. Infinity disables splitting.
    double session_gap = 240.0;
};

/// Per attacker session and per sequence node whose parents intersect the
/// observed signatures: keep temporally consistent subsets, pick the
/// arg-max credibility (ties: more present signs, then earlier enumeration
/// order) and emit its present alarms as a time-ordered sequence. Missing
/// priors default to `empirical_priors(groups)`.
std::vector<CyberAttackSequence> recognize_cas(const CausalNetwork& net,
                                               const AttackerGroups& groups,
                                               const RecognizeOptions& options = {});

/// "s5^CE1 > s6^CE3 > s1^CE2, 98.4%"
std::string render(const CyberAttackSequence& cas);

nlohmann::json to_json(const CyberAttackSequence& cas);
CyberAttackSequence cas_from_json(const nlohmann::json& j);
std::string write_cas_jsonl(std::span<const CyberAttackSequence> list);
std::vector<CyberAttackSequence> read_cas_jsonl(const std::filesystem::path& path);

}  // namespace cpsmine
