#include "cpsmine/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "cpsmine/error.hpp"
#include "cpsmine/pipeline.hpp"
#include "cpsmine/scenario.hpp"
#include "cpsmine/util.hpp"

namespace cpsmine::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string config;
    std::string script;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
};

void report(std::ostream& err, int code, std::string_view stage, std::string_view kind, std::string_view msg) {
    err << json{{"status", "error"}, {"code", code}, {"stage", stage}, {"kind", kind}, {"message", msg}}.dump()
        << "\n";
}

/// Maps an exception escaping `fn` onto an exit code and a diagnostic line.
template <class F>
int guarded(std::string_view stage, std::ostream& err, F&& fn) {
    try {
        fn();
        return Ok;
    } catch (const ConfigError& e) {
        report(err, ConfigFailure, stage, "config", e.what());
        return ConfigFailure;
    } catch (const ScriptError& e) {
        report(err, ConfigFailure, stage, "script", e.what());
        return ConfigFailure;
    } catch (const InputError& e) {
        report(err, InputFailure, stage, "input", e.what());
        return InputFailure;
    } catch (const ParseError& e) {
        report(err, InputFailure, stage, "parse", e.what());
        return InputFailure;
    } catch (const FormatError& e) {
        report(err, InputFailure, stage, "format", e.what());
        return InputFailure;
    } catch (const SchemaError& e) {
        report(err, InputFailure, stage, "schema", e.what());
        return InputFailure;
    } catch (const Error& e) {
        report(err, StageFailure, stage, "stage", e.what());
        return StageFailure;
    } catch (const std::exception& e) {
        report(err, StageFailure, stage, "internal", e.what());
        return StageFailure;
    }
}

PipelineConfig resolve_config(const Options& o) {
    if (o.config.empty()) throw ConfigError("--config is required");
    auto cfg = load_config(o.config);
    if (o.seed) {
        cfg.document["seed"] = *o.seed;
        cfg = parse_config(cfg.document, fs::path(o.config).parent_path());
    }
    if (!o.out.empty()) {
        cfg.output = o.out;
        cfg.document["paths"]["output"] = o.out;
    }
    return cfg;
}

int run_synth(const Options& o, std::ostream& out, std::ostream& err) {
    return guarded("synth", err, [&] {
        const std::string path = !o.script.empty() ? o.script : o.config;
        if (path.empty()) throw ConfigError("synth needs a script path");
        if (!fs::exists(path)) throw ConfigError("script not found: " + path);
        ScenarioScript script;
        try {
            script = load_script(path);
        } catch (const IoError& e) {
            throw ConfigError(e.what());
        }
        if (o.seed) script.seed = *o.seed;
        const fs::path dir = o.out.empty() ? fs::path("bundle") : fs::path(o.out);
        const auto bundle = generate(script);
        write_bundle(bundle, dir);
        std::string all;
        for (const auto& [name, content] : bundle.files) all += name + "\n" + content;
        out << fmt::format("bundle {} {} files {}\n", dir.string(), bundle.files.size(), hex64(fnv1a64(all)));
        spdlog::info("synth: {} alarms, {} episodes, {} planted patterns", bundle.alarms.size(),
                     bundle.episodes.size(), bundle.patterns.size());
    });
}

int run_stages(const Options& o, const std::vector<std::string>& stages, std::ostream& out, std::ostream& err) {
    std::optional<PipelineConfig> cfg;
    if (const int rc = guarded("config", err, [&] { cfg = resolve_config(o); }); rc != Ok) return rc;
    for (const auto& stage : stages) {
        StageSummary summary;
        const int rc = guarded(stage, err, [&] {
            if (stage == "cas")
                summary = run_cas_stage(*cfg);
            else if (stage == "pae")
                summary = run_pae_stage(*cfg);
            else
                summary = run_mine_stage(*cfg);
        });
        if (rc != Ok) return rc;
        out << json{{"status", "ok"}, {"stage", stage}, {"counts", summary.counts}}.dump() << "\n";
    }
    return Ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"cpsmine: cyber-physical attack pattern mining"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", o.config, "pipeline config (JSON)");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--seed", o.seed, "override the seed");
    app.add_flag("--verbose", o.verbose, "debug logging");

    auto* synth = app.add_subcommand("synth", "generate a synthetic bundle from a scenario script");
    synth->add_option("script", o.script, "scenario script (JSON)");
    app.add_subcommand("cas", "alarms -> cyber attack sequences");
    app.add_subcommand("pae", "PMU data -> physical attack events");
    app.add_subcommand("mine", "cas + pae outputs -> attack patterns");
    app.add_subcommand("pipeline", "cas, pae and mine in order");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return Usage;
    }

    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("cpsmine", sink);
    logger->set_pattern("[%l] %v");
    logger->set_level(o.verbose ? spdlog::level::debug : spdlog::level::info);
    const auto previous = spdlog::default_logger();
    spdlog::set_default_logger(logger);

    const auto* sub = app.get_subcommands().front();
    const auto name = sub->get_name();
    int rc;
    if (name == "synth")
        rc = run_synth(o, out, err);
    else if (name == "pipeline")
        rc = run_stages(o, {"cas", "pae", "mine"}, out, err);
    else
        rc = run_stages(o, {name}, out, err);
    spdlog::set_default_logger(previous);
    return rc;
}

}  // namespace cpsmine::cli
