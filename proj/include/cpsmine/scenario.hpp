#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpsmine/alarm.hpp"
#include "cpsmine/criteria.hpp"
#include "cpsmine/pae.hpp"
#include "cpsmine/pmu.hpp"
#include "cpsmine/tfp_tree.hpp"
#include "cpsmine/topology.hpp"

namespace cpsmine {

enum class EpisodeKind { DataInjection, CommandInjection, RelaySetting, Fault };

EpisodeKind parse_episode_kind(std::string_view text);
std::string_view to_string(EpisodeKind kind);
/// Screening features an episode of this kind is built to trip.
std::set<Feature> intended_features(EpisodeKind kind);

struct PhysicalPlan {
    int label = 0;
    std::string source;  ///< PMU observing the episode
    EpisodeKind kind = EpisodeKind::DataInjection;
    double delay = 55.0;        ///< seconds from the last cyber step to onset
    std::size_t duration = 20;  ///< samples
};

struct SessionPlan {
    std::vector<std::pair<std::string, ComponentId>> steps;  ///< (signature, cyber component)
    double step_gap = 20.0;
    std::optional<PhysicalPlan> physical;
    std::size_t repeat = 1;
};

struct AttackerPlan {
    std::string ip;
    std::vector<SessionPlan> sessions;
};

struct DistractorPlan {
    int label = 1;
    std::string source;
    EpisodeKind kind = EpisodeKind::Fault;
    std::size_t duration = 20;
    std::size_t repeat = 1;
};

struct NoiseConfig {
    std::size_t spurious_alarms = 0;
    std::vector<std::string> spurious_signatures = {"s2", "s7", "s8"};
    std::size_t duplicate_bursts = 0;
    std::size_t burst_size = 4;  ///< alarms per burst, original included
    double burst_spacing = 2.0;
    std::size_t corrupt_lines = 0;
    double time_jitter = 0.0;  ///< uniform +- seconds on scripted alarm times
};

struct TrainingEpisode {
    int label = 0;
    std::string source;
    EpisodeKind kind = EpisodeKind::DataInjection;
    std::size_t count = 1;
    std::size_t duration = 20;
};

struct ScenarioScript {
    std::uint64_t seed = 0;
    double start_time = 1600000000.0;
    double sample_period = 1.0;
    double slot_seconds = 600.0;
    double lead = 60.0;  ///< seconds from slot start to the first step
    TopologyMap topology;
    nlohmann::json network;  ///< causal network template, written verbatim
    LabelMap label_map;
    std::vector<std::string> pmus = {"R1", "R2", "R3", "R4"};
    std::vector<AttackerPlan> attackers;
    std::vector<DistractorPlan> distractors;
    NoiseConfig noise;
    std::vector<TrainingEpisode> training;
    std::size_t training_gap = 30;  ///< normal samples between training episodes
    nlohmann::json pipeline = nlohmann::json::object();  ///< merged into config.json
};

/// Relative paths inside the script resolve against `base`. Throws
/// ScriptError on any inconsistency.
ScenarioScript parse_script(const nlohmann::json& j, const std::filesystem::path& base = {});
/// Throws IoError when the file is missing, ScriptError when invalid.
ScenarioScript load_script(const std::filesystem::path& path);

struct Episode {
    std::string trace;  ///< "test" or "train"
    std::string source;
    int label = 0;
    EpisodeKind kind = EpisodeKind::DataInjection;
    std::size_t first = 0;  ///< sample index, inclusive
    std::size_t last = 0;   ///< inclusive
    double onset_time = 0.0;
    std::set<Feature> intended;
    std::string attacker;  ///< empty for distractors and training episodes
};

struct PlantedPattern {
    std::vector<Item> antecedent;
    Item consequent;
    std::size_t attackers = 0;           ///< attackers with a record containing it
    std::size_t records = 0;             ///< records containing it
    std::size_t antecedent_records = 0;  ///< records containing the antecedent
    std::size_t total_attackers = 0;
};

struct Bundle {
    std::map<std::string, std::string> files;  ///< file name -> content
    std::vector<AlarmEvent> alarms;            ///< clean alarms, time order
    std::size_t corrupt_lines = 0;
    std::size_t duplicate_bursts = 0;
    PmuSeries test_series;
    PmuSeries train_series;
    std::vector<Episode> episodes;
    AttackDatabase records;  ///< one scripted record per session
    std::vector<PlantedPattern> patterns;
    nlohmann::json ground_truth;
};

/// Deterministic for a fixed script.
Bundle generate(const ScenarioScript& script);
void write_bundle(const Bundle& bundle, const std::filesystem::path& dir);

}  // namespace cpsmine
