#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cpsmine/alarm.hpp"
#include "cpsmine/cas.hpp"
#include "cpsmine/criteria.hpp"
#include "cpsmine/fcm.hpp"
#include "cpsmine/forest.hpp"
#include "cpsmine/topology.hpp"

namespace cpsmine {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "1.0.0";

/// Everything a stage run needs. Paths are already resolved against the
/// directory of the config file.
struct PipelineConfig {
    std::vector<std::filesystem::path> alarms;
    AlarmLogFormat alarm_format = AlarmLogFormat::Csv;
    int snort_year = 1970;
    std::vector<std::filesystem::path> pmu;
    std::vector<std::filesystem::path> pmu_train;
    std::optional<std::filesystem::path> forest_model;  ///< pre-trained forest.json
    std::filesystem::path topology;
    std::filesystem::path network;
    std::filesystem::path label_map;
    std::filesystem::path output = "out";

    std::uint64_t seed = 0;
    EncoderConfig encoder;
    FcmParams fcm{4, 2.0, 1e-6, 300, 0};
    double merge_window = 10.0;  ///< seconds, duplicate collapse inside a cluster
    RecognizeOptions recognize;
    CriteriaConfig criteria;
    ForestConfig forest;
    /// Normal training windows kept per abnormal training window.
    double normal_ratio = 1.0;
    double alpha = 0.30;
    double beta = 0.30;
    ReachPolicy reach_policy = ReachPolicy::Direct;
    bool topology_pruning = false;
    double bucket_width = 10.0;

    /// The config document after command-line overrides; hashed into manifests.
    nlohmann::json document;
    std::string hash() const;

    std::filesystem::path stage_dir(std::string_view stage) const { return output / stage; }
};

/// Percent (an integer in [1, 100]) or fraction in (0, 1]; anything else
/// raises ConfigError("<name> out of range").
double normalize_threshold(double value, std::string_view name);

/// Throws ConfigError on unknown keys, wrong types or out-of-range values.
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base);
/// Throws ConfigError when the file is missing or not JSON.
PipelineConfig load_config(const std::filesystem::path& path);

struct StageSummary {
    std::string stage;
    std::vector<std::string> outputs;  ///< file names inside the stage directory
    nlohmann::json counts = nlohmann::json::object();
};

/// out/cas: aggregated_alarms.csv, alarm_rejects.csv, cas.jsonl, cas.txt.
StageSummary run_cas_stage(const PipelineConfig& cfg);
/// out/pae: forest.json (when one is used), rules.csv, pae.jsonl, pmu_rejects.csv.
StageSummary run_pae_stage(const PipelineConfig& cfg);
/// Consumes out/cas/cas.jsonl and out/pae/pae.jsonl. out/mine: attack_db.jsonl,
/// patterns.csv, patterns.txt.
StageSummary run_mine_stage(const PipelineConfig& cfg);

}  // namespace cpsmine
