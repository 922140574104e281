#include "cpsmine/cas.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <fmt/format.h>

#include "cpsmine/error.hpp"
#include "cpsmine/util.hpp"

namespace cpsmine {

using nlohmann::json;

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

void check_probability(double p, const std::string& what, bool allow_one = true) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0 || (!allow_one && p >= 1.0))
        throw ValidationError(fmt::format("{} = {} is not a valid probability", what, p));
}

}  // namespace

CausalNetwork::CausalNetwork(std::vector<AlarmNode> alarms, std::vector<SequenceNode> sequences,
                             std::map<EdgeKey, double> edges, double leak)
    : alarms_(std::move(alarms)),
      sequences_(std::move(sequences)),
      edges_(std::move(edges)),
      leak_(leak) {
    check_probability(leak_, "leak", false);
    for (std::size_t i = 0; i < alarms_.size(); ++i) {
        const auto& a = alarms_[i];
        if (a.label.empty()) throw ValidationError("alarm node with empty label");
        if (!alarm_index_.emplace(a.label, i).second)
            throw ValidationError("duplicate alarm node " + a.label);
        if (a.prior) check_probability(*a.prior, "prior of " + a.label);
    }
    for (std::size_t i = 0; i < sequences_.size(); ++i) {
        const auto& s = sequences_[i];
        if (s.label.empty()) throw ValidationError("sequence node with empty label");
        if (alarm_index_.count(s.label))
            throw ValidationError("label " + s.label + " used in both layers");
        if (!sequence_index_.emplace(s.label, i).second)
            throw ValidationError("duplicate sequence node " + s.label);
        if (s.parents.empty())
            throw ValidationError("sequence node " + s.label + " has no incoming edge");
        std::set<std::string> seen;
        for (const auto& p : s.parents) {
            if (!alarm_index_.count(p))
                throw ValidationError("sequence " + s.label + " references unknown alarm " + p);
            if (!seen.insert(p).second)
                throw ValidationError("sequence " + s.label + " lists " + p + " twice");
            if (!edges_.count({p, s.label}))
                throw ValidationError("missing edge " + p + " -> " + s.label);
        }
    }
    for (const auto& [key, k] : edges_) {
        const auto& [from, to] = key;
        if (!alarm_index_.count(from))
            throw ValidationError("edge source " + from + " is not an alarm node");
        const auto it = sequence_index_.find(to);
        if (it == sequence_index_.end())
            throw ValidationError("edge target " + to + " is not a sequence node");
        const auto& parents = sequences_[it->second].parents;
        if (std::find(parents.begin(), parents.end(), from) == parents.end())
            throw ValidationError("edge " + from + " -> " + to + " is not in the parent list");
        check_probability(k, "activation " + from + " -> " + to);
    }
}

const SequenceNode& CausalNetwork::sequence(const std::string& label) const {
    const auto it = sequence_index_.find(label);
    if (it == sequence_index_.end()) throw UnknownNode("unknown sequence node " + label);
    return sequences_[it->second];
}

double CausalNetwork::activation(const std::string& alarm, const std::string& sequence) const {
    const auto it = edges_.find({alarm, sequence});
    if (it == edges_.end()) throw UnknownNode("no edge " + alarm + " -> " + sequence);
    return it->second;
}

bool CausalNetwork::has_prior(const std::string& alarm) const {
    const auto it = alarm_index_.find(alarm);
    return it != alarm_index_.end() && alarms_[it->second].prior.has_value();
}

double CausalNetwork::prior(const std::string& alarm) const {
    const auto it = alarm_index_.find(alarm);
    if (it == alarm_index_.end()) throw UnknownNode("unknown alarm node " + alarm);
    const auto& p = alarms_[it->second].prior;
    if (!p) throw ConfigError("alarm node " + alarm + " has no prior");
    return *p;
}

CausalNetwork CausalNetwork::with_default_priors(const std::map<std::string, double>& defaults) const {
    auto alarms = alarms_;
    for (auto& a : alarms) {
        if (a.prior) continue;
        if (auto it = defaults.find(a.label); it != defaults.end()) a.prior = it->second;
    }
    return CausalNetwork(std::move(alarms), sequences_, edges_, leak_);
}

CausalNetwork CausalNetwork::from_json(const json& j) {
    try {
        std::vector<AlarmNode> alarms;
        for (const auto& a : j.at("alarms")) {
            if (a.is_string()) {
                alarms.push_back({a.get<std::string>(), std::nullopt});
            } else {
                AlarmNode node{a.at("label").get<std::string>(), std::nullopt};
                if (a.contains("prior") && !a.at("prior").is_null())
                    node.prior = a.at("prior").get<double>();
                alarms.push_back(std::move(node));
            }
        }
        std::vector<SequenceNode> sequences;
        for (const auto& s : j.at("sequences"))
            sequences.push_back(
                {s.at("label").get<std::string>(), s.at("parents").get<std::vector<std::string>>()});
        std::map<EdgeKey, double> edges;
        for (const auto& e : j.at("edges")) {
            EdgeKey key{e.at("parent").get<std::string>(), e.at("sequence").get<std::string>()};
            if (!edges.emplace(key, e.at("activation").get<double>()).second)
                throw ValidationError("duplicate edge " + key.first + " -> " + key.second);
        }
        const double leak = j.value("leak", 0.0);
        return CausalNetwork(std::move(alarms), std::move(sequences), std::move(edges), leak);
    } catch (const json::exception& e) {
        throw ParseError(std::string("network config: ") + e.what());
    }
}

json CausalNetwork::to_json() const {
    json j;
    j["alarms"] = json::array();
    for (const auto& a : alarms_) {
        json node{{"label", a.label}};
        if (a.prior) node["prior"] = *a.prior;
        j["alarms"].push_back(node);
    }
    j["sequences"] = json::array();
    for (const auto& s : sequences_) j["sequences"].push_back({{"label", s.label}, {"parents", s.parents}});
    j["edges"] = json::array();
    for (const auto& s : sequences_)
        for (const auto& p : s.parents)
            j["edges"].push_back(
                {{"parent", p}, {"sequence", s.label}, {"activation", edges_.at({p, s.label})}});
    j["leak"] = leak_;
    return j;
}

CausalNetwork load_network(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return CausalNetwork::from_json(j);
}

std::size_t FuzzySubset::present_count() const {
    return static_cast<std::size_t>(std::count_if(assignment.begin(), assignment.end(),
                                                  [](const auto& a) { return a.second == Sign::Present; }));
}

std::vector<std::string> FuzzySubset::present() const {
    std::vector<std::string> out;
    for (const auto& [label, sign] : assignment)
        if (sign == Sign::Present) out.push_back(label);
    return out;
}

std::string FuzzySubset::str() const {
    std::string out = "(";
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (i) out += ", ";
        out += assignment[i].first + (assignment[i].second == Sign::Present ? "+" : "-");
    }
    return out + ")";
}

std::vector<FuzzySubset> enumerate_subsets(const CausalNetwork& net,
                                           const std::set<std::string>& observed,
                                           const std::string& target) {
    auto parents = net.sequence(target).parents;
    std::sort(parents.begin(), parents.end());
    const std::size_t p = parents.size();
    if (p >= 63) throw ValidationError("too many parents to enumerate for " + target);
    std::vector<FuzzySubset> out;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << p); ++code) {
        FuzzySubset s{target, {}};
        bool admissible = true;
        for (std::size_t j = 0; j < p; ++j) {
            const bool present = (code >> (p - 1 - j)) & 1U;
            if (present && !observed.count(parents[j])) {
                admissible = false;
                break;
            }
            s.assignment.emplace_back(parents[j], present ? Sign::Present : Sign::Absent);
        }
        if (admissible) out.push_back(std::move(s));
    }
    return out;
}

double noisy_or(const CausalNetwork& net, const FuzzySubset& subset) {
    double off = 1.0 - net.leak();
    for (const auto& [label, sign] : subset.assignment)
        if (sign == Sign::Present) off *= 1.0 - net.activation(label, subset.sequence);
    return 1.0 - off;
}

double unnormalized_score(const CausalNetwork& net, const FuzzySubset& subset) {
    double score = clamp_prob(noisy_or(net, subset));
    for (const auto& [label, sign] : subset.assignment) {
        const double pi = clamp_prob(net.prior(label));
        score *= sign == Sign::Present ? pi : 1.0 - pi;
    }
    return score;
}

std::vector<double> credibility(const CausalNetwork& net, std::span<const FuzzySubset> subsets) {
    std::vector<double> scores;
    scores.reserve(subsets.size());
    double total = 0.0;
    for (const auto& s : subsets) {
        scores.push_back(unnormalized_score(net, s));
        total += scores.back();
    }
    if (total > 0.0)
        for (auto& s : scores) s /= total;
    return scores;
}

double credibility(const CausalNetwork& net, const FuzzySubset& subset) {
    const auto& parents = net.sequence(subset.sequence).parents;
    const std::set<std::string> all(parents.begin(), parents.end());
    const auto space = enumerate_subsets(net, all, subset.sequence);
    const auto bel = credibility(net, space);
    for (std::size_t i = 0; i < space.size(); ++i)
        if (space[i].assignment == subset.assignment) return bel[i];
    throw ValidationError("subset " + subset.str() + " does not match the parents of " +
                          subset.sequence);
}

AttackerGroups group_by_attacker(std::span<const AlarmEvent> events) {
    AttackerGroups groups;
    for (const auto& e : events) groups[e.src_ip].push_back(e);
    for (auto& [_, g] : groups)
        std::stable_sort(g.begin(), g.end(), [](const auto& a, const auto& b) {
            return std::tie(a.time, a.cid) < std::tie(b.time, b.cid);
        });
    return groups;
}

std::map<std::string, double> empirical_priors(const AttackerGroups& groups) {
    std::map<std::string, double> out;
    if (groups.empty()) return out;
    for (const auto& [_, g] : groups) {
        std::set<std::string> seen;
        for (const auto& e : g) seen.insert(e.sig_name);
        for (const auto& s : seen) out[s] += 1.0;
    }
    for (auto& [_, v] : out) v /= static_cast<double>(groups.size());
    return out;
}

namespace {

void recognize_session(const CausalNetwork& net, const std::string& attacker,
                       std::span<const AlarmEvent> session, double min_credibility,
                       std::vector<CyberAttackSequence>& out) {
    std::map<std::string, const AlarmEvent*> first;
    for (const auto& e : session) first.emplace(e.sig_name, &e);  // session is time-sorted
    std::set<std::string> observed;
    for (const auto& [sig, _] : first) observed.insert(sig);

    for (const auto& node : net.sequences()) {
        const bool touches = std::any_of(node.parents.begin(), node.parents.end(),
                                         [&](const auto& p) { return observed.count(p) != 0; });
        if (!touches) continue;

        auto subsets = enumerate_subsets(net, observed, node.label);
        // present alarms must follow the template's step order
        std::erase_if(subsets, [&](const FuzzySubset& s) {
            double last = -std::numeric_limits<double>::infinity();
            for (const auto& p : node.parents) {
                const auto it = std::find_if(s.assignment.begin(), s.assignment.end(),
                                             [&](const auto& a) { return a.first == p; });
                if (it->second != Sign::Present) continue;
                const double t = first.at(p)->time;
                if (t < last) return true;
                last = t;
            }
            return false;
        });
        const auto bel = credibility(net, subsets);
        std::size_t best = 0;
        for (std::size_t i = 1; i < subsets.size(); ++i) {
            if (bel[i] > bel[best] ||
                (bel[i] == bel[best] && subsets[i].present_count() > subsets[best].present_count()))
                best = i;
        }
        const auto& winner = subsets[best];
        if (winner.present_count() == 0 || bel[best] < min_credibility) continue;

        CyberAttackSequence cas{attacker, node.label, {}, bel[best]};
        for (const auto& p : node.parents) {
            const auto it = std::find_if(winner.assignment.begin(), winner.assignment.end(),
                                         [&](const auto& a) { return a.first == p; });
            if (it->second != Sign::Present) continue;
            const auto* ev = first.at(p);
            cas.steps.push_back({ev->sig_name, ev->component, ev->time});
        }
        std::stable_sort(cas.steps.begin(), cas.steps.end(),
                         [](const auto& a, const auto& b) { return a.time < b.time; });
        out.push_back(std::move(cas));
    }
}

}  // namespace

std::vector<CyberAttackSequence> recognize_cas(const CausalNetwork& base,
                                               const AttackerGroups& groups,
                                               const RecognizeOptions& options) {
    const auto net = base.with_default_priors(empirical_priors(groups));
    std::vector<CyberAttackSequence> out;
    for (const auto& [attacker, events] : groups) {
        std::size_t begin = 0;
        for (std::size_t i = 1; i <= events.size(); ++i) {
            if (i == events.size() || events[i].time - events[i - 1].time > options.session_gap) {
                recognize_session(net, attacker,
                                  std::span<const AlarmEvent>(events).subspan(begin, i - begin),
                                  options.min_credibility, out);
                begin = i;
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.attacker, a.steps.front().time, a.sequence) <
               std::tie(b.attacker, b.steps.front().time, b.sequence);
    });
    return out;
}

std::string render(const CyberAttackSequence& cas) {
    std::string out;
    for (std::size_t i = 0; i < cas.steps.size(); ++i) {
        if (i) out += " > ";
        out += cas.steps[i].sig_name + "^" + cas.steps[i].component.str();
    }
    return out + fmt::format(", {:.1f}%", cas.credibility * 100.0);
}

json to_json(const CyberAttackSequence& cas) {
    json steps = json::array();
    for (const auto& s : cas.steps)
        steps.push_back({{"sig_name", s.sig_name}, {"component", s.component.str()}, {"time", s.time}});
    return {{"schema_version", 1},
            {"attacker", cas.attacker},
            {"sequence", cas.sequence},
            {"steps", steps},
            {"credibility", cas.credibility}};
}

CyberAttackSequence cas_from_json(const json& j) {
    try {
        CyberAttackSequence cas;
        cas.attacker = j.at("attacker").get<std::string>();
        cas.sequence = j.value("sequence", "");
        cas.credibility = j.at("credibility").get<double>();
        for (const auto& s : j.at("steps"))
            cas.steps.push_back({s.at("sig_name").get<std::string>(),
                                 ComponentId::parse(s.at("component").get<std::string>()),
                                 s.at("time").get<double>()});
        if (cas.steps.empty()) throw ValidationError("attack sequence without steps");
        if (cas.credibility < 0.0 || cas.credibility > 1.0)
            throw ValidationError("credibility out of [0,1]");
        return cas;
    } catch (const json::exception& e) {
        throw ParseError(std::string("attack sequence record: ") + e.what());
    }
}

std::string write_cas_jsonl(std::span<const CyberAttackSequence> list) {
    std::string out;
    for (const auto& c : list) out += to_json(c).dump() + "\n";
    return out;
}

std::vector<CyberAttackSequence> read_cas_jsonl(const std::filesystem::path& path) {
    std::vector<CyberAttackSequence> out;
    for (const auto& line : read_lines(path)) {
        if (trim(line).empty()) continue;
        try {
            out.push_back(cas_from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
    }
    return out;
}

}  // namespace cpsmine
