#include "cpsmine/pmu.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "cpsmine/error.hpp"
#include "cpsmine/util.hpp"

namespace cpsmine {

namespace {

constexpr std::array<std::string_view, kSignalCount> kNames = {
    "PA1:VH",  "PA2:VH",  "PA3:VH",  "PM1:V",  "PM2:V",  "PM3:V",  "PA4:IH", "PA5:IH",
    "PA6:IH",  "PM4:I",   "PM5:I",   "PM6:I",  "PA7:VH", "PA8:VH", "PA9:VH", "PM7:V",
    "PM8:V",   "PM9:V",   "PA10:VH", "PA11:VH", "PA12:VH", "PM10:V", "PM11:V", "PM12:V",
    "F",       "DF",      "PA:Z",    "PA:ZH",  "S",
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string_view signal_name(Signal s) { return kNames[static_cast<std::size_t>(s)]; }

std::optional<Signal> parse_signal(std::string_view name) {
    for (std::size_t i = 0; i < kSignalCount; ++i)
        if (kNames[i] == name) return static_cast<Signal>(i);
    static const std::map<std::string_view, Signal> aliases = {
        {"PA10:IH", Signal::IPosAngle}, {"PA11:IH", Signal::INegAngle},
        {"PA12:IH", Signal::IZeroAngle}, {"PM10:I", Signal::IPosMag},
        {"PM11:I", Signal::INegMag},     {"PM12:I", Signal::IZeroMag},
    };
    if (auto it = aliases.find(name); it != aliases.end()) return it->second;
    return std::nullopt;
}

bool is_angle(Signal s) {
    const auto i = static_cast<std::size_t>(s);
    return (i < 24 && (i / 3) % 2 == 0) || s == Signal::ZAngle;
}

bool is_magnitude(Signal s) {
    const auto i = static_cast<std::size_t>(s);
    return (i < 24 && (i / 3) % 2 == 1) || s == Signal::ZMag;
}

PmuParseResult parse_pmu_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty PMU file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv(line);

    static const std::regex token(R"(R(\d+)-(.+))");
    std::optional<std::size_t> time_col;
    std::optional<std::size_t> marker_col;
    std::map<std::string, std::array<std::optional<std::size_t>, kSignalCount>> layout;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string h(trim(header[c]));
        const auto l = lower(h);
        if (l == "time" || l == "timestamp") {
            time_col = c;
            continue;
        }
        if (l == "marker") {
            marker_col = c;
            continue;
        }
        std::smatch m;
        if (!std::regex_match(h, m, token)) continue;
        const auto sig = parse_signal(m[2].str());
        if (!sig) continue;
        auto& slot = layout["R" + m[1].str()][static_cast<std::size_t>(*sig)];
        if (slot) throw SchemaError("duplicate column " + h);
        slot = c;
    }
    if (layout.empty()) throw SchemaError("no R<k>-<Signal> columns in PMU header");
    for (const auto& [src, cols] : layout)
        for (std::size_t i = 0; i < kSignalCount; ++i)
            if (!cols[i])
                throw SchemaError(fmt::format("missing mandatory column {}-{}", src, kNames[i]));

    PmuParseResult result;
    for (const auto& [src, _] : layout) result.sources.push_back(src);

    std::size_t line_no = 1;
    std::size_t row_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        auto reject = [&](std::string why) { result.rejects.push_back({line_no, std::move(why)}); };
        if (fields.size() != header.size()) {
            reject(fmt::format("expected {} fields, got {}", header.size(), fields.size()));
            continue;
        }
        double t = static_cast<double>(row_index);
        if (time_col) {
            const auto v = parse_double(trim(fields[*time_col]));
            if (!v || !std::isfinite(*v)) {
                reject("invalid time");
                continue;
            }
            t = *v;
        }
        std::optional<int> marker;
        if (marker_col) {
            const auto f = trim(fields[*marker_col]);
            if (!f.empty()) {
                const auto v = parse_int(f);
                if (!v) {
                    reject("invalid marker");
                    continue;
                }
                marker = static_cast<int>(*v);
            }
        }
        std::vector<PmuSample> row;
        std::string why;
        for (const auto& [src, cols] : layout) {
            PmuSample s{src, t, {}, marker};
            for (std::size_t i = 0; i < kSignalCount && why.empty(); ++i) {
                const auto name = kNames[i];
                const auto v = parse_double(trim(fields[*cols[i]]));
                if (!v || !std::isfinite(*v)) {
                    why = fmt::format("non-numeric value in {}-{}", src, name);
                } else if (is_magnitude(static_cast<Signal>(i)) && *v < 0.0) {
                    why = fmt::format("negative magnitude in {}-{}", src, name);
                } else {
                    s.values[i] = is_angle(static_cast<Signal>(i)) ? wrap_degrees(*v) : *v;
                }
            }
            if (!why.empty()) break;
            row.push_back(std::move(s));
        }
        ++row_index;
        if (!why.empty()) {
            reject(std::move(why));
            continue;
        }
        for (auto& s : row) result.samples.push_back(std::move(s));
    }
    return result;
}

PmuSeries by_source(std::span<const PmuSample> samples) {
    PmuSeries out;
    for (const auto& s : samples) out[s.source].push_back(s);
    for (auto& [_, v] : out)
        std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
    return out;
}

PmuSeries merge_series(std::span<const PmuParseResult> parts) {
    std::vector<PmuSample> all;
    for (const auto& p : parts) all.insert(all.end(), p.samples.begin(), p.samples.end());
    return by_source(all);
}

std::string write_pmu_csv(const PmuSeries& series, bool with_marker) {
    if (series.empty()) return "time\n";
    const auto& first = series.begin()->second;
    for (const auto& [src, v] : series)
        if (v.size() != first.size()) throw ValidationError("PMU series " + src + " has a different length");

    std::string out = "time";
    for (const auto& [src, _] : series)
        for (auto name : kNames) out += fmt::format(",{}-{}", src, name);
    if (with_marker) out += ",marker";
    out += '\n';
    for (std::size_t r = 0; r < first.size(); ++r) {
        out += format_double(first[r].time);
        for (const auto& [src, v] : series) {
            if (v[r].time != first[r].time)
                throw ValidationError("PMU series " + src + " is not aligned with the others");
            for (double x : v[r].values) {
                out += ',';
                out += format_double(x);
            }
        }
        if (with_marker) {
            out += ',';
            if (first[r].marker) out += std::to_string(*first[r].marker);
        }
        out += '\n';
    }
    return out;
}

std::string write_pmu_rejects_csv(std::span<const PmuReject> rejects) {
    std::string out = "line_number,reason\n";
    for (const auto& r : rejects) out += fmt::format("{},{}\n", r.line_number, csv_field(r.reason));
    return out;
}

}  // namespace cpsmine
