#include "cpsmine/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cpsmine/error.hpp"
#include "cpsmine/miner.hpp"
#include "cpsmine/pae.hpp"
#include "cpsmine/pmu.hpp"
#include "cpsmine/tfp_tree.hpp"
#include "cpsmine/util.hpp"

namespace cpsmine {

namespace fs = std::filesystem;
using nlohmann::json;

std::string PipelineConfig::hash() const { return hex64(fnv1a64(document.dump())); }

double normalize_threshold(double value, std::string_view name) {
    if (value > 0.0 && value <= 1.0) return value;
    if (value > 1.0 && value <= 100.0 && value == std::floor(value)) {
        spdlog::info("{} = {} read as a percentage ({})", name, value, value / 100.0);
        return value / 100.0;
    }
    throw ConfigError(fmt::format("{} out of range: {}", name, value));
}

// --- config ----------------------------------------------------------------------

namespace {

void check_keys(const json& obj, std::string_view section, std::initializer_list<std::string_view> known) {
    if (!obj.is_object()) throw ConfigError(fmt::format("'{}' must be an object", section));
    for (const auto& [k, v] : obj.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw ConfigError(fmt::format("unknown key '{}' in '{}'", k, section));
}

template <class T>
void read(const json& obj, const char* key, T& out, std::string_view section) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(fmt::format("{}.{} has the wrong type", section, key));
    }
}

std::size_t read_count(const json& obj, const char* key, std::size_t def, std::string_view section,
                       std::size_t min = 1) {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min))
        throw ConfigError(fmt::format("{}.{} must be an integer >= {}", section, key, min));
    return v.get<std::size_t>();
}

std::vector<fs::path> read_paths(const json& paths, const char* key, const fs::path& base) {
    std::vector<fs::path> out;
    if (!paths.contains(key)) return out;
    const auto& v = paths.at(key);
    if (v.is_string()) {
        out.push_back(base / v.get<std::string>());
    } else if (v.is_array()) {
        for (const auto& p : v) {
            if (!p.is_string()) throw ConfigError(fmt::format("paths.{} entries must be strings", key));
            out.push_back(base / p.get<std::string>());
        }
    } else {
        throw ConfigError(fmt::format("paths.{} must be a string or a list", key));
    }
    return out;
}

fs::path read_path(const json& paths, const char* key, const fs::path& base, bool required) {
    if (!paths.contains(key)) {
        if (required) throw ConfigError(fmt::format("paths.{} is required", key));
        return {};
    }
    if (!paths.at(key).is_string()) throw ConfigError(fmt::format("paths.{} must be a string", key));
    return base / paths.at(key).get<std::string>();
}

double positive(double v, std::string_view what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(fmt::format("{} must be > 0", what));
    return v;
}

}  // namespace

PipelineConfig parse_config(const json& doc, const fs::path& base) {
    PipelineConfig c;
    check_keys(doc, "config", {"schema_version", "seed", "paths", "fcm", "cas", "criteria", "forest", "mining"});
    c.document = doc;
    if (doc.contains("schema_version") && doc.at("schema_version") != kSchemaVersion)
        throw ConfigError(fmt::format("unsupported config schema_version {}", doc.at("schema_version").dump()));
    if (doc.contains("seed")) {
        const auto& seed = doc.at("seed");
        if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<long long>() < 0))
            throw ConfigError("seed must be a non-negative integer");
        c.seed = doc.at("seed").get<std::uint64_t>();
    }

    const json paths = doc.value("paths", json::object());
    check_keys(paths, "paths",
               {"alarms", "alarm_format", "snort_year", "pmu", "pmu_train", "forest", "topology", "network",
                "label_map", "output"});
    c.alarms = read_paths(paths, "alarms", base);
    if (paths.contains("alarm_format")) {
        try {
            c.alarm_format = parse_alarm_format(paths.at("alarm_format").get<std::string>());
        } catch (const Error& e) {
            throw ConfigError(e.what());
        } catch (const json::exception&) {
            throw ConfigError("paths.alarm_format must be a string");
        }
    }
    read(paths, "snort_year", c.snort_year, "paths");
    c.pmu = read_paths(paths, "pmu", base);
    c.pmu_train = read_paths(paths, "pmu_train", base);
    if (paths.contains("forest")) c.forest_model = read_path(paths, "forest", base, true);
    c.topology = read_path(paths, "topology", base, true);
    c.network = read_path(paths, "network", base, false);
    c.label_map = read_path(paths, "label_map", base, false);
    c.output = base / paths.value("output", std::string("out"));

    const json fcm = doc.value("fcm", json::object());
    check_keys(fcm, "fcm", {"c", "m", "tol", "max_iter", "merge_window", "hash_buckets"});
    c.fcm.clusters = read_count(fcm, "c", c.fcm.clusters, "fcm");
    read(fcm, "m", c.fcm.fuzzifier, "fcm");
    read(fcm, "tol", c.fcm.tolerance, "fcm");
    c.fcm.max_iter = read_count(fcm, "max_iter", c.fcm.max_iter, "fcm");
    read(fcm, "merge_window", c.merge_window, "fcm");
    c.encoder.hash_buckets = read_count(fcm, "hash_buckets", c.encoder.hash_buckets, "fcm");
    if (!(c.fcm.fuzzifier > 1.0)) throw ConfigError("fcm.m must be > 1");
    positive(c.fcm.tolerance, "fcm.tol");
    if (!(c.merge_window >= 0.0)) throw ConfigError("fcm.merge_window must be >= 0");

    const json cas = doc.value("cas", json::object());
    check_keys(cas, "cas", {"min_credibility", "session_gap"});
    read(cas, "min_credibility", c.recognize.min_credibility, "cas");
    read(cas, "session_gap", c.recognize.session_gap, "cas");
    if (!(c.recognize.min_credibility >= 0.0 && c.recognize.min_credibility <= 1.0))
        throw ConfigError("cas.min_credibility out of range");
    positive(c.recognize.session_gap, "cas.session_gap");

    const json cr = doc.value("criteria", json::object());
    check_keys(cr, "criteria",
               {"eps1", "eps2", "eps3", "eps4", "eps_zero", "window", "tau_delta", "mutation_fraction"});
    read(cr, "eps1", c.criteria.eps1, "criteria");
    read(cr, "eps2", c.criteria.eps2, "criteria");
    read(cr, "eps3", c.criteria.eps3, "criteria");
    read(cr, "eps4", c.criteria.eps4, "criteria");
    read(cr, "eps_zero", c.criteria.eps_zero, "criteria");
    c.criteria.window = read_count(cr, "window", c.criteria.window, "criteria");
    c.criteria.tau_delta = read_count(cr, "tau_delta", c.criteria.tau_delta, "criteria");
    read(cr, "mutation_fraction", c.criteria.mutation_fraction, "criteria");
    c.criteria.validate();

    const json fo = doc.value("forest", json::object());
    check_keys(fo, "forest",
               {"T", "n", "x_prime", "max_depth", "min_leaf", "pilot_trees", "keep_fraction", "normal_ratio"});
    c.forest.trees = read_count(fo, "T", c.forest.trees, "forest");
    if (fo.contains("n")) c.forest.sample_size = read_count(fo, "n", 1, "forest");
    if (fo.contains("x_prime")) c.forest.feature_budget = read_count(fo, "x_prime", 1, "forest");
    c.forest.max_depth = read_count(fo, "max_depth", c.forest.max_depth, "forest");
    c.forest.min_leaf = read_count(fo, "min_leaf", c.forest.min_leaf, "forest");
    c.forest.pilot_trees = read_count(fo, "pilot_trees", c.forest.pilot_trees, "forest", 0);
    read(fo, "keep_fraction", c.forest.keep_fraction, "forest");
    if (!(c.forest.keep_fraction > 0.0 && c.forest.keep_fraction <= 1.0))
        throw ConfigError("forest.keep_fraction out of range");
    read(fo, "normal_ratio", c.normal_ratio, "forest");
    positive(c.normal_ratio, "forest.normal_ratio");

    const json mi = doc.value("mining", json::object());
    check_keys(mi, "mining", {"alpha", "beta", "reach_policy", "topology_pruning", "bucket_width"});
    double alpha = 0.30, beta = 0.30;
    read(mi, "alpha", alpha, "mining");
    read(mi, "beta", beta, "mining");
    c.alpha = normalize_threshold(alpha, "alpha");
    c.beta = normalize_threshold(beta, "beta");
    if (mi.contains("reach_policy")) {
        try {
            c.reach_policy = parse_reach_policy(mi.at("reach_policy").get<std::string>());
        } catch (const Error& e) {
            throw ConfigError(e.what());
        } catch (const json::exception&) {
            throw ConfigError("mining.reach_policy must be a string");
        }
    }
    read(mi, "topology_pruning", c.topology_pruning, "mining");
    read(mi, "bucket_width", c.bucket_width, "mining");
    positive(c.bucket_width, "mining.bucket_width");

    c.fcm.seed = derive_seed(c.seed, 1);
    c.forest.seed = derive_seed(c.seed, 2);
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("config not found: " + path.string());
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(doc, path.parent_path());
}

// --- shared helpers --------------------------------------------------------------

namespace {

/// Runs `fn`, turning any library error into an InputError naming `file`.
template <class F>
auto from_input(const fs::path& file, F&& fn) {
    if (!fs::exists(file)) throw InputError(fmt::format("{}: file not found", file.string()));
    try {
        return fn();
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        throw InputError(fmt::format("{}: {}", file.string(), e.what()));
    } catch (const json::exception& e) {
        throw InputError(fmt::format("{}: {}", file.string(), e.what()));
    }
}

struct Manifest {
    std::string stage;
    json inputs = json::array();
    json outputs = json::array();

    void input(const fs::path& p) {
        inputs.push_back({{"path", p.generic_string()}, {"fnv1a64", hex64(fnv1a64(read_file(p)))}});
    }
};

void emit(const fs::path& dir, const std::string& name, const std::string& content, Manifest& m,
          StageSummary& s) {
    write_file(dir / name, content);
    m.outputs.push_back({{"file", name}, {"fnv1a64", hex64(fnv1a64(content))}});
    s.outputs.push_back(name);
}

void write_manifest(const PipelineConfig& cfg, const fs::path& dir, const Manifest& m, const StageSummary& s) {
    const json doc = {{"schema_version", kSchemaVersion},
                      {"tool", "cpsmine"},
                      {"version", kToolVersion},
                      {"stage", m.stage},
                      {"seed", cfg.seed},
                      {"config_hash", cfg.hash()},
                      {"config", cfg.document},
                      {"inputs", m.inputs},
                      {"outputs", m.outputs},
                      {"counts", s.counts}};
    write_file(dir / "manifest.json", doc.dump(2) + "\n");
}

fs::path make_stage_dir(const PipelineConfig& cfg, std::string_view stage) {
    const auto dir = cfg.stage_dir(stage);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    return dir;
}

TopologyMap read_topology(const PipelineConfig& cfg, Manifest& m) {
    auto topo = from_input(cfg.topology, [&] { return load_topology(cfg.topology); });
    m.input(cfg.topology);
    return topo;
}

PmuSeries read_pmu(const std::vector<fs::path>& files, Manifest& m, std::string& rejects_csv,
                   std::size_t& rejected) {
    std::vector<PmuParseResult> parts;
    for (const auto& f : files) {
        auto r = from_input(f, [&] {
            std::ifstream in(f);
            if (!in) throw IoError("cannot open");
            return parse_pmu_csv(in);
        });
        for (const auto& rj : r.rejects)
            rejects_csv += fmt::format("{},{},{}\n", csv_field(f.filename().string()), rj.line_number,
                                       csv_field(rj.reason));
        rejected += r.rejects.size();
        m.input(f);
        parts.push_back(std::move(r));
    }
    return merge_series(parts);
}

}  // namespace

// --- cas ---------------------------------------------------------------------------

StageSummary run_cas_stage(const PipelineConfig& cfg) {
    StageSummary s{"cas", {}, json::object()};
    Manifest m{"cas"};

    std::vector<AlarmEvent> events;
    std::string rejects = "file,line,reason\n";
    std::size_t n_rejects = 0;
    AlarmParseOptions opts;
    opts.snort_year = cfg.snort_year;
    for (const auto& f : cfg.alarms) {
        auto r = from_input(f, [&] {
            std::ifstream in(f);
            if (!in) throw IoError("cannot open");
            return parse_alarm_log(in, cfg.alarm_format, opts);
        });
        for (const auto& rj : r.rejects)
            rejects += fmt::format("{},{},{}\n", csv_field(f.filename().string()), rj.line_number,
                                   csv_field(rj.reason));
        n_rejects += r.rejects.size();
        events.insert(events.end(), r.events.begin(), r.events.end());
        m.input(f);
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return std::tie(a.time, a.cid) < std::tie(b.time, b.cid); });

    if (cfg.network.empty()) throw ConfigError("paths.network is required for the cas stage");
    const auto net = from_input(cfg.network, [&] { return load_network(cfg.network); });
    m.input(cfg.network);

    std::vector<AlarmEvent> aggregated;
    std::size_t clusters = 0;
    if (!events.empty()) {
        const auto vectors = encode_alarms(events, cfg.encoder);
        auto params = cfg.fcm;
        params.clusters = std::min(params.clusters, count_distinct(vectors));
        if (params.clusters < cfg.fcm.clusters)
            spdlog::info("fcm: c lowered from {} to {} distinct alarm vectors", cfg.fcm.clusters, params.clusters);
        const auto result = fcm_cluster(vectors, params);
        if (!result.converged) spdlog::warn("fcm: no convergence after {} iterations", result.iterations);
        clusters = result.clusters;
        aggregated = aggregate(events, result, cfg.merge_window);
    }
    const auto groups = group_by_attacker(aggregated);
    const auto cas = recognize_cas(net, groups, cfg.recognize);

    const auto dir = make_stage_dir(cfg, "cas");
    emit(dir, "aggregated_alarms.csv", write_alarm_csv(aggregated), m, s);
    emit(dir, "alarm_rejects.csv", rejects, m, s);
    emit(dir, "cas.jsonl", write_cas_jsonl(cas), m, s);
    std::string text;
    for (const auto& c : cas) text += fmt::format("{} {}\n", c.attacker, render(c));
    emit(dir, "cas.txt", text, m, s);
    s.counts = {{"alarms", events.size()},
                {"rejected_lines", n_rejects},
                {"clusters", clusters},
                {"aggregated", aggregated.size()},
                {"attackers", groups.size()},
                {"cas", cas.size()}};
    write_manifest(cfg, dir, m, s);
    spdlog::info("cas: {} alarms ({} rejected lines) -> {} aggregated -> {} sequences", events.size(), n_rejects,
                 aggregated.size(), cas.size());
    return s;
}

// --- pae ---------------------------------------------------------------------------

StageSummary run_pae_stage(const PipelineConfig& cfg) {
    StageSummary s{"pae", {}, json::object()};
    Manifest m{"pae"};

    if (cfg.pmu.empty()) throw ConfigError("paths.pmu is required for the pae stage");
    std::string rejects = "file,line,reason\n";
    std::size_t n_rejects = 0;
    const auto series = read_pmu(cfg.pmu, m, rejects, n_rejects);
    const auto topo = read_topology(cfg, m);
    if (cfg.label_map.empty()) throw ConfigError("paths.label_map is required for the pae stage");
    const auto labels = from_input(cfg.label_map, [&] { return load_label_map(cfg.label_map); });
    m.input(cfg.label_map);

    const auto candidates = screen_candidates(series, cfg.criteria);

    std::optional<Forest> forest;
    std::optional<Dataset> training;
    if (cfg.forest_model) {
        forest = from_input(*cfg.forest_model,
                            [&] { return Forest::from_json(json::parse(read_file(*cfg.forest_model))); });
        m.input(*cfg.forest_model);
    } else if (!cfg.pmu_train.empty()) {
        std::string train_rejects;
        std::size_t n_train_rejects = 0;
        const auto train = read_pmu(cfg.pmu_train, m, train_rejects, n_train_rejects);
        rejects += train_rejects;
        n_rejects += n_train_rejects;
        auto windows = screen_candidates(train, cfg.criteria);
        const auto normal = normal_windows(train, windows, cfg.criteria);
        // evenly spaced pick so Normal does not swamp the attack classes
        const auto keep = std::min(normal.size(),
                                   static_cast<std::size_t>(std::ceil(cfg.normal_ratio * static_cast<double>(
                                                                                        std::max<std::size_t>(windows.size(), 1)))));
        for (std::size_t k = 0; k < keep; ++k) windows.push_back(normal[k * normal.size() / keep]);
        try {
            training = build_training_matrix(windows, train, cfg.criteria);
        } catch (const UnlabeledWindow& e) {
            throw InputError(fmt::format("training PMU data: {}", e.what()));
        }
        std::set<int> classes(training->labels.begin(), training->labels.end());
        if (training->size() < 2 || classes.size() < 2)
            throw InputError("training PMU data yields fewer than two windows or a single class");
        forest = train_forest(*training, cfg.forest);
    } else if (!candidates.empty()) {
        throw ConfigError("abnormal windows found but neither paths.forest nor paths.pmu_train is set");
    }

    std::vector<PhysicalAttackEvent> pae;
    if (forest) pae = recognize_pae(*forest, candidates, series, cfg.criteria, labels, topo);

    const auto dir = make_stage_dir(cfg, "pae");
    std::size_t n_rules = 0;
    if (forest) {
        emit(dir, "forest.json", forest->to_json().dump() + "\n", m, s);
        std::vector<DecisionRule> rules;
        if (training) rules = extract_rules(*forest, *training);
        n_rules = rules.size();
        emit(dir, "rules.csv", write_rules_csv(rules), m, s);
    } else {
        emit(dir, "rules.csv", write_rules_csv({}), m, s);
    }
    emit(dir, "pae.jsonl", write_pae_jsonl(pae), m, s);
    emit(dir, "pmu_rejects.csv", rejects, m, s);
    s.counts = {{"sources", series.size()},
                {"rejected_rows", n_rejects},
                {"candidate_windows", candidates.size()},
                {"training_rows", training ? training->size() : 0},
                {"rules", n_rules},
                {"pae", pae.size()}};
    if (forest) s.counts["forest_hash"] = hex64(forest->hash());
    write_manifest(cfg, dir, m, s);
    spdlog::info("pae: {} candidate windows -> {} physical events", candidates.size(), pae.size());
    return s;
}

// --- mine --------------------------------------------------------------------------

StageSummary run_mine_stage(const PipelineConfig& cfg) {
    StageSummary s{"mine", {}, json::object()};
    Manifest m{"mine"};

    const auto cas_file = cfg.stage_dir("cas") / "cas.jsonl";
    const auto pae_file = cfg.stage_dir("pae") / "pae.jsonl";
    if (!fs::exists(cas_file) || !fs::exists(pae_file))
        throw InputError(fmt::format("missing stage output {}; run the cas and pae stages first",
                                     (!fs::exists(cas_file) ? cas_file : pae_file).string()));
    const auto cas = from_input(cas_file, [&] { return read_cas_jsonl(cas_file); });
    m.input(cas_file);
    const auto pae = from_input(pae_file, [&] { return read_pae_jsonl(pae_file); });
    m.input(pae_file);
    const auto topo = read_topology(cfg, m);

    const auto ad = build_attack_database(cas, pae, topo, cfg.reach_policy, cfg.bucket_width);
    const auto tree = build_tree(ad, cfg.alpha);
    std::optional<TopologyPruning> pruning;
    if (cfg.topology_pruning) pruning = TopologyPruning{&topo, cfg.reach_policy};
    const auto patterns = mine(tree, ad, cfg.alpha, cfg.beta, pruning);

    const auto dir = make_stage_dir(cfg, "mine");
    emit(dir, "attack_db.jsonl", write_attack_db_jsonl(ad), m, s);
    emit(dir, "patterns.csv", write_patterns_csv(patterns), m, s);
    emit(dir, "patterns.txt", write_patterns_text(patterns), m, s);
    s.counts = {{"cas", cas.size()},
                {"pae", pae.size()},
                {"records", ad.size()},
                {"attackers", tree.total_attackers},
                {"frequent_items", tree.frequent_items().size()},
                {"patterns", patterns.size()},
                {"alpha", cfg.alpha},
                {"beta", cfg.beta}};
    write_manifest(cfg, dir, m, s);
    spdlog::info("mine: {} records, {} patterns", ad.size(), patterns.size());
    return s;
}

}  // namespace cpsmine
