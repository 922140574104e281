#include "cpsmine/topology.hpp"

#include <algorithm>
#include <deque>

#include "cpsmine/error.hpp"
#include "cpsmine/util.hpp"

namespace cpsmine {

using nlohmann::json;

std::optional<ComponentId> ComponentId::try_parse(std::string_view text) {
    text = trim(text);
    if (text.size() < 3) return std::nullopt;
    ComponentKind kind;
    if (text.substr(0, 2) == "CE") {
        kind = ComponentKind::Cyber;
    } else if (text.substr(0, 2) == "PE") {
        kind = ComponentKind::Physical;
    } else {
        return std::nullopt;
    }
    const auto digits = text.substr(2);
    if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return std::nullopt;
    const auto idx = parse_int(digits);
    if (!idx || *idx < 1 || *idx > 1'000'000'000) return std::nullopt;
    return ComponentId{kind, static_cast<int>(*idx)};
}

ComponentId ComponentId::parse(std::string_view text) {
    if (auto id = try_parse(text)) return *id;
    throw ParseError("invalid component id '" + std::string(text) + "'");
}

std::string ComponentId::str() const {
    return (is_cyber() ? "CE" : "PE") + std::to_string(index);
}

ReachPolicy parse_reach_policy(std::string_view text) {
    if (text == "direct") return ReachPolicy::Direct;
    if (text == "transitive") return ReachPolicy::Transitive;
    throw ConfigError("unknown reach policy '" + std::string(text) + "'");
}

std::string_view to_string(ReachPolicy policy) {
    return policy == ReachPolicy::Direct ? "direct" : "transitive";
}

TopologyMap::TopologyMap(std::vector<ComponentId> cyber, std::vector<ComponentId> physical,
                         std::vector<Relation> relations) {
    for (const auto& c : cyber) {
        if (!c.is_cyber()) throw ValidationError(c.str() + " listed as cyber node");
        if (!cyber_.insert(c).second) throw ValidationError("duplicate node " + c.str());
    }
    for (const auto& p : physical) {
        if (!p.is_physical()) throw ValidationError(p.str() + " listed as physical node");
        if (!physical_.insert(p).second) throw ValidationError("duplicate node " + p.str());
    }
    for (auto [a, b] : relations) {
        if (a == b) throw ValidationError("self-loop on " + a.str());
        if (!contains(a)) throw ValidationError("relation endpoint " + a.str() + " is not declared");
        if (!contains(b)) throw ValidationError("relation endpoint " + b.str() + " is not declared");
        if (a.is_physical() && b.is_physical())
            throw ValidationError("physical-physical relation " + a.str() + "-" + b.str() +
                                  " is not supported");
        if (b < a) std::swap(a, b);
        if (relations_.insert({a, b}).second) {
            adjacency_[a].push_back(b);
            adjacency_[b].push_back(a);
        }
    }
    for (auto& [_, adj] : adjacency_) std::sort(adj.begin(), adj.end());
}

bool TopologyMap::contains(const ComponentId& id) const {
    return id.is_cyber() ? cyber_.count(id) != 0 : physical_.count(id) != 0;
}

std::vector<ComponentId> TopologyMap::connected_cyber(const ComponentId& pe) const {
    if (!pe.is_physical() || !physical_.count(pe))
        throw UnknownComponent("unknown physical component " + pe.str());
    std::vector<ComponentId> out;
    if (auto it = adjacency_.find(pe); it != adjacency_.end()) {
        for (const auto& n : it->second)
            if (n.is_cyber()) out.push_back(n);
    }
    return out;
}

bool TopologyMap::is_reachable(const std::vector<ComponentId>& cyber_set, const ComponentId& pe,
                               ReachPolicy policy) const {
    const auto neighbours = connected_cyber(pe);
    for (const auto& c : cyber_set) {
        if (!c.is_cyber() || !cyber_.count(c))
            throw UnknownComponent("unknown cyber component " + c.str());
    }
    auto adjacent = [&](const ComponentId& c) {
        return std::binary_search(neighbours.begin(), neighbours.end(), c);
    };
    if (policy == ReachPolicy::Direct)
        return std::any_of(cyber_set.begin(), cyber_set.end(), adjacent);

    // breadth-first over cyber-cyber relations only
    std::set<ComponentId> seen(cyber_set.begin(), cyber_set.end());
    std::deque<ComponentId> queue(seen.begin(), seen.end());
    while (!queue.empty()) {
        const auto cur = queue.front();
        queue.pop_front();
        if (adjacent(cur)) return true;
        auto it = adjacency_.find(cur);
        if (it == adjacency_.end()) continue;
        for (const auto& n : it->second) {
            if (n.is_cyber() && seen.insert(n).second) queue.push_back(n);
        }
    }
    return false;
}

json TopologyMap::to_json() const {
    json j;
    j["cyber"] = json::array();
    j["physical"] = json::array();
    j["relations"] = json::array();
    for (const auto& c : cyber_) j["cyber"].push_back(c.str());
    for (const auto& p : physical_) j["physical"].push_back(p.str());
    for (const auto& [a, b] : relations_) j["relations"].push_back({a.str(), b.str()});
    return j;
}

TopologyMap TopologyMap::from_json(const json& j) {
    if (!j.is_object()) throw ParseError("topology document must be a JSON object");
    auto ids = [&](const char* key) {
        std::vector<ComponentId> out;
        if (!j.contains(key)) throw ParseError(std::string("topology is missing \"") + key + "\"");
        const auto& arr = j.at(key);
        if (!arr.is_array()) throw ParseError(std::string("\"") + key + "\" must be an array");
        for (const auto& v : arr) {
            if (!v.is_string()) throw ParseError(std::string("non-string entry in \"") + key + "\"");
            out.push_back(ComponentId::parse(v.get<std::string>()));
        }
        return out;
    };
    auto cyber = ids("cyber");
    auto physical = ids("physical");
    std::vector<Relation> rel;
    if (j.contains("relations")) {
        const auto& arr = j.at("relations");
        if (!arr.is_array()) throw ParseError("\"relations\" must be an array");
        for (const auto& r : arr) {
            if (!r.is_array() || r.size() != 2 || !r[0].is_string() || !r[1].is_string())
                throw ParseError("each relation must be a two-element string array");
            rel.emplace_back(ComponentId::parse(r[0].get<std::string>()),
                             ComponentId::parse(r[1].get<std::string>()));
        }
    }
    return TopologyMap(std::move(cyber), std::move(physical), std::move(rel));
}

std::string TopologyMap::serialize() const { return to_json().dump(2) + "\n"; }

TopologyMap parse_topology(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("topology: ") + e.what());
    }
    return TopologyMap::from_json(j);
}

TopologyMap load_topology(const std::filesystem::path& path) {
    return parse_topology(read_file(path));
}

}  // namespace cpsmine
