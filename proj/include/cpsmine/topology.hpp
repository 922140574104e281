#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace cpsmine {

enum class ComponentKind { Cyber, Physical };

/// A cyber (CE<i>) or physical (PE<i>) component of the monitored system.
struct ComponentId {
    ComponentKind kind = ComponentKind::Cyber;
    int index = 1;

    static ComponentId cyber(int i) { return {ComponentKind::Cyber, i}; }
    static ComponentId physical(int i) { return {ComponentKind::Physical, i}; }

    /// Parses "CE<i>" / "PE<i>" with i >= 1. Throws ParseError.
    static ComponentId parse(std::string_view text);
    static std::optional<ComponentId> try_parse(std::string_view text);

    bool is_cyber() const { return kind == ComponentKind::Cyber; }
    bool is_physical() const { return kind == ComponentKind::Physical; }
    std::string str() const;

    auto operator<=>(const ComponentId&) const = default;
};

enum class ReachPolicy {
    Direct,      ///< a cyber node must share a relation with the physical node
    Transitive,  ///< cyber-cyber relations are followed before the final hop
};

ReachPolicy parse_reach_policy(std::string_view text);
std::string_view to_string(ReachPolicy policy);

/// Immutable cyber-physical connectivity map. Relations are undirected;
/// cyber-cyber and cyber-physical links are accepted, physical-physical links
/// and self-loops are rejected at construction.
class TopologyMap {
public:
    using Relation = std::pair<ComponentId, ComponentId>;

    TopologyMap() = default;
    /// Throws ValidationError on duplicate nodes, wrong-kind nodes, dangling
    /// endpoints, self-loops or physical-physical relations.
    TopologyMap(std::vector<ComponentId> cyber, std::vector<ComponentId> physical,
                std::vector<Relation> relations);

    const std::set<ComponentId>& cyber_nodes() const { return cyber_; }
    const std::set<ComponentId>& physical_nodes() const { return physical_; }
    /// Normalized (first < second), sorted.
    const std::set<Relation>& relations() const { return relations_; }

    bool contains(const ComponentId& id) const;

    /// Cyber nodes sharing a relation with `pe`, ascending. Throws
    /// UnknownComponent when `pe` is not a physical node of the map.
    std::vector<ComponentId> connected_cyber(const ComponentId& pe) const;

    /// Whether `pe` can be reached from any node of `cyber_set`.
    bool is_reachable(const std::vector<ComponentId>& cyber_set, const ComponentId& pe,
                      ReachPolicy policy = ReachPolicy::Direct) const;

    nlohmann::json to_json() const;
    static TopologyMap from_json(const nlohmann::json& j);
    std::string serialize() const;

private:
    std::set<ComponentId> cyber_;
    std::set<ComponentId> physical_;
    std::set<Relation> relations_;
    std::map<ComponentId, std::vector<ComponentId>> adjacency_;
};

/// Parses a topology document (JSON text). Throws ParseError / ValidationError.
TopologyMap parse_topology(std::string_view text);
/// Throws IoError when the file cannot be read.
TopologyMap load_topology(const std::filesystem::path& path);

}  // namespace cpsmine
