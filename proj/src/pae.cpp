#include "cpsmine/pae.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "cpsmine/error.hpp"
#include "cpsmine/util.hpp"

namespace cpsmine {

using nlohmann::json;

bool is_scenario_label(int code) { return (code >= 1 && code <= 30) || (code >= 35 && code <= 41); }

std::vector<std::string> feature_columns(std::span<const std::string> sources) {
    std::vector<std::string> cols;
    for (const auto& src : sources)
        for (std::size_t i = 0; i < kSignalCount; ++i) {
            const auto base = fmt::format("{}-{}", src, signal_name(static_cast<Signal>(i)));
            cols.push_back(base);
            cols.push_back(base + ".min");
            cols.push_back(base + ".max");
        }
    for (const char* name : {"eta_U", "eta_I", "delta_I", "delta_U", "tau"}) cols.emplace_back(name);
    return cols;
}

std::vector<double> window_features(const AbnormalWindow& window, const PmuSeries& series,
                                    const CriteriaConfig& cfg) {
    std::vector<double> row;
    row.reserve(series.size() * kSignalCount * 3 + 5);
    for (const auto& [src, samples] : series) {
        auto lo = std::lower_bound(samples.begin(), samples.end(), window.start_time,
                                   [](const PmuSample& s, double t) { return s.time < t; });
        auto hi = std::upper_bound(samples.begin(), samples.end(), window.end_time,
                                   [](double t, const PmuSample& s) { return t < s.time; });
        if (lo >= hi)
            throw ShapeError(fmt::format("PMU {} has no samples in [{}, {}]", src, window.start_time,
                                         window.end_time));
        const double n = static_cast<double>(hi - lo);
        for (std::size_t i = 0; i < kSignalCount; ++i) {
            double sum = 0.0, mn = std::numeric_limits<double>::infinity(), mx = -mn;
            for (auto it = lo; it != hi; ++it) {
                const double v = it->values[i];
                sum += v;
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            row.push_back(sum / n);
            row.push_back(mn);
            row.push_back(mx);
        }
    }
    const auto ind = indicators(window.samples, cfg);
    row.push_back(ind.eta_u);
    row.push_back(ind.eta_i);
    row.push_back(ind.delta_i);
    row.push_back(ind.delta_u);
    row.push_back(ind.tau);
    return row;
}

int window_label(const AbnormalWindow& window) {
    std::map<int, std::size_t> votes;
    for (const auto& s : window.samples)
        if (s.marker) ++votes[*s.marker];
    if (votes.empty())
        throw UnlabeledWindow(fmt::format("window {} [{}, {}] carries no marker", window.source,
                                          window.start_time, window.end_time));
    int best = votes.begin()->first;
    std::size_t best_n = 0;
    for (const auto& [label, n] : votes)
        if (n > best_n) {
            best = label;
            best_n = n;
        }
    return best;
}

Dataset build_training_matrix(std::span<const AbnormalWindow> windows, const PmuSeries& series,
                              const CriteriaConfig& cfg) {
    std::vector<std::string> sources;
    for (const auto& [src, _] : series) sources.push_back(src);
    Dataset d;
    d.columns = feature_columns(sources);
    for (const auto& w : windows) {
        d.labels.push_back(window_label(w));
        d.rows.push_back(window_features(w, series, cfg));
    }
    return d;
}

LabelMap LabelMap::from_json(const json& j) {
    try {
        LabelMap m;
        if (j.contains("labels"))
            for (const auto& [k, v] : j.at("labels").items()) {
                const auto code = parse_int(k);
                if (!code || !is_scenario_label(static_cast<int>(*code)))
                    throw ValidationError("label map: invalid scenario label " + k);
                const auto pe = ComponentId::parse(v.get<std::string>());
                if (!pe.is_physical()) throw ValidationError("label map: " + k + " maps to a cyber node");
                m.labels[static_cast<int>(*code)] = pe;
            }
        if (j.contains("sources"))
            for (const auto& [k, v] : j.at("sources").items()) {
                const auto pe = ComponentId::parse(v.get<std::string>());
                if (!pe.is_physical()) throw ValidationError("label map: " + k + " maps to a cyber node");
                m.sources[k] = pe;
            }
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("label map: ") + e.what());
    }
}

json LabelMap::to_json() const {
    json labels_j = json::object(), sources_j = json::object();
    for (const auto& [k, v] : labels) labels_j[std::to_string(k)] = v.str();
    for (const auto& [k, v] : sources) sources_j[k] = v.str();
    return {{"labels", labels_j}, {"sources", sources_j}};
}

ComponentId LabelMap::resolve(int label, const std::string& source) const {
    if (auto it = labels.find(label); it != labels.end()) return it->second;
    if (auto it = sources.find(source); it != sources.end()) return it->second;
    throw UnknownLabelMapping(fmt::format("no component for label {} observed by {}", label, source));
}

LabelMap load_label_map(const std::filesystem::path& path) {
    try {
        return LabelMap::from_json(json::parse(read_file(path)));
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::vector<PhysicalAttackEvent> recognize_pae(const Forest& forest,
                                               std::span<const AbnormalWindow> windows,
                                               const PmuSeries& series, const CriteriaConfig& cfg,
                                               const LabelMap& labels, const TopologyMap& topo) {
    std::vector<PhysicalAttackEvent> out;
    for (const auto& w : windows) {
        const auto [label, share] = forest.classify(window_features(w, series, cfg));
        if (label == kNormalLabel) continue;
        const auto pe = labels.resolve(label, w.source);
        if (!topo.contains(pe))
            throw UnknownLabelMapping(fmt::format("label {} maps to {}, absent from the topology", label, pe.str()));
        out.push_back({label, pe, w.start_time, w.end_time, share, w.source});
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.start_time, a.source) < std::tie(b.start_time, b.source);
    });
    return out;
}

json to_json(const PhysicalAttackEvent& e) {
    return {{"schema_version", 1},     {"label", e.label},   {"component", e.component.str()},
            {"start", e.start_time},   {"end", e.end_time},  {"vote_share", e.vote_share},
            {"source", e.source}};
}

PhysicalAttackEvent pae_from_json(const json& j) {
    try {
        PhysicalAttackEvent e;
        e.label = j.at("label").get<int>();
        e.component = ComponentId::parse(j.at("component").get<std::string>());
        e.start_time = j.at("start").get<double>();
        e.end_time = j.at("end").get<double>();
        e.vote_share = j.at("vote_share").get<double>();
        e.source = j.value("source", "");
        if (!e.component.is_physical()) throw ValidationError("physical event on a cyber component");
        if (e.end_time < e.start_time) throw ValidationError("physical event with an inverted span");
        return e;
    } catch (const json::exception& ex) {
        throw ParseError(std::string("physical event record: ") + ex.what());
    }
}

std::string write_pae_jsonl(std::span<const PhysicalAttackEvent> events) {
    std::string out;
    for (const auto& e : events) out += to_json(e).dump() + "\n";
    return out;
}

std::vector<PhysicalAttackEvent> read_pae_jsonl(const std::filesystem::path& path) {
    std::vector<PhysicalAttackEvent> out;
    for (const auto& line : read_lines(path)) {
        if (trim(line).empty()) continue;
        try {
            out.push_back(pae_from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
    }
    return out;
}

}  // namespace cpsmine
