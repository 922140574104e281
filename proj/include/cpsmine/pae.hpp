#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpsmine/criteria.hpp"
#include "cpsmine/forest.hpp"
#include "cpsmine/topology.hpp"

namespace cpsmine {

inline constexpr int kNormalLabel = 41;

/// Scenario codes 1..30 and 35..41.
bool is_scenario_label(int code);

/// Feature columns for the given sources: per source and signal the window
/// mean ("R3-PM7:V"), minimum (".min") and maximum (".max"), then
/// eta_U, eta_I, delta_I, delta_U, tau.
std::vector<std::string> feature_columns(std::span<const std::string> sources);

/// One row for `window`: statistics over every source's samples whose time
/// lies inside the window span, indicators over the window's own samples.
std::vector<double> window_features(const AbnormalWindow& window, const PmuSeries& series,
                                    const CriteriaConfig& cfg);

/// Majority marker of the window's samples (ties to the lower code). Throws
/// UnlabeledWindow when no sample carries a marker.
int window_label(const AbnormalWindow& window);

/// Rows in window order; labels from window_label. Zero windows give an
/// empty matrix that still carries the column header.
Dataset build_training_matrix(std::span<const AbnormalWindow> windows, const PmuSeries& series,
                              const CriteriaConfig& cfg);

/// Maps a scenario label, or failing that the PMU source that observed it,
/// to a physical component.
struct LabelMap {
    std::map<int, ComponentId> labels;
    std::map<std::string, ComponentId> sources;

    static LabelMap from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    /// Throws UnknownLabelMapping.
    ComponentId resolve(int label, const std::string& source) const;
};

LabelMap load_label_map(const std::filesystem::path& path);

struct PhysicalAttackEvent {
    int label = 0;
    ComponentId component = ComponentId::physical(1);
    double start_time = 0.0;
    double end_time = 0.0;
    double vote_share = 0.0;
    std::string source;

    std::string item() const { return "e" + std::to_string(label); }
    bool operator==(const PhysicalAttackEvent&) const = default;
};

/// Classifies every window; Normal windows are dropped, the others become
/// events on the component given by `labels`. Throws UnknownLabelMapping
/// when a label cannot be mapped or maps outside the topology.
std::vector<PhysicalAttackEvent> recognize_pae(const Forest& forest,
                                               std::span<const AbnormalWindow> windows,
                                               const PmuSeries& series, const CriteriaConfig& cfg,
                                               const LabelMap& labels, const TopologyMap& topo);

nlohmann::json to_json(const PhysicalAttackEvent& e);
PhysicalAttackEvent pae_from_json(const nlohmann::json& j);
std::string write_pae_jsonl(std::span<const PhysicalAttackEvent> events);
std::vector<PhysicalAttackEvent> read_pae_jsonl(const std::filesystem::path& path);

}  // namespace cpsmine
