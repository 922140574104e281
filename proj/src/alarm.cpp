#include "cpsmine/alarm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <regex>
#include <tuple>

#include <fmt/format.h>

#include "cpsmine/error.hpp"
#include "cpsmine/fcm.hpp"
#include "cpsmine/util.hpp"

namespace cpsmine {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<int> fixed_digits(std::string_view s, std::size_t pos, std::size_t n) {
    if (pos + n > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

std::optional<double> civil_to_epoch(int y, int mo, int d, int h, int mi, double sec) {
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec < 0.0 || sec >= 61.0) return std::nullopt;
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + sec;
}

}  // namespace

SignatureDictionary::SignatureDictionary(std::vector<Signature> sigs) : sigs_(std::move(sigs)) {}

SignatureDictionary SignatureDictionary::standard() {
    return SignatureDictionary({
        {"s1", "sshd buffer overflow"},
        {"s2", "ftp_rhosts"},
        {"s3", "rsh login"},
        {"s4", "local buffer overflow"},
        {"s5", "sadmind_ping"},
        {"s6", "RDP Inception"},
        {"s7", "Rootkit"},
        {"s8", "Landmodule"},
    });
}

std::optional<std::string> SignatureDictionary::resolve(std::string_view label_or_name) const {
    const auto key = lower(trim(label_or_name));
    for (const auto& s : sigs_) {
        if (lower(s.label) == key || lower(s.name) == key) return s.label;
    }
    return std::nullopt;
}

AlarmLogFormat parse_alarm_format(std::string_view text) {
    if (text == "csv") return AlarmLogFormat::Csv;
    if (text == "snort_fast") return AlarmLogFormat::SnortFast;
    throw ConfigError("unknown alarm log format '" + std::string(text) + "'");
}

std::optional<double> parse_iso8601(std::string_view s) {
    s = trim(s);
    // YYYY-MM-DDTHH:MM:SS
    if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':')
        return std::nullopt;
    const auto y = fixed_digits(s, 0, 4), mo = fixed_digits(s, 5, 2), d = fixed_digits(s, 8, 2),
               h = fixed_digits(s, 11, 2), mi = fixed_digits(s, 14, 2), se = fixed_digits(s, 17, 2);
    if (!y || !mo || !d || !h || !mi || !se) return std::nullopt;
    double sec = *se;
    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        std::size_t end = pos + 1;
        while (end < s.size() && s[end] >= '0' && s[end] <= '9') ++end;
        if (end == pos + 1) return std::nullopt;
        sec += *parse_double(std::string("0") + std::string(s.substr(pos, end - pos)));
        pos = end;
    }
    double offset = 0.0;
    if (pos < s.size()) {
        if (s[pos] == 'Z' && pos + 1 == s.size()) {
            pos += 1;
        } else if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
            const auto oh = fixed_digits(s, pos + 1, 2), om = fixed_digits(s, pos + 4, 2);
            if (!oh || !om) return std::nullopt;
            offset = (*oh * 3600.0 + *om * 60.0) * (s[pos] == '+' ? 1.0 : -1.0);
            pos = s.size();
        } else {
            return std::nullopt;
        }
    }
    auto t = civil_to_epoch(*y, *mo, *d, *h, *mi, sec);
    if (!t) return std::nullopt;
    return *t - offset;
}

namespace {

enum class TimeMode { Unknown, Epoch, Iso };

struct CsvLineParser {
    const AlarmParseOptions& opts;
    TimeMode mode = TimeMode::Unknown;

    std::optional<double> parse_time(std::string_view field, std::string& why) {
        const auto epoch = parse_double(field);
        const auto iso = epoch ? std::nullopt : parse_iso8601(field);
        if (mode == TimeMode::Unknown) {
            if (epoch) mode = TimeMode::Epoch;
            else if (iso) mode = TimeMode::Iso;
        }
        if (mode == TimeMode::Epoch && epoch && std::isfinite(*epoch)) return epoch;
        if (mode == TimeMode::Iso && iso) return iso;
        why = (epoch || iso) ? "time format differs from the rest of the file" : "invalid time";
        return std::nullopt;
    }

    std::optional<AlarmEvent> parse(std::string_view line, std::string& why) {
        const auto f = split_csv(line);
        if (f.size() != 8) {
            why = fmt::format("expected 8 fields, found {}", f.size());
            return std::nullopt;
        }
        AlarmEvent ev;
        ev.cid = std::string(trim(f[0]));
        if (ev.cid.empty()) {
            why = "empty cid";
            return std::nullopt;
        }
        const auto t = parse_time(f[1], why);
        if (!t) return std::nullopt;
        ev.time = *t;
        ev.src_ip = std::string(trim(f[2]));
        ev.dst_ip = std::string(trim(f[3]));
        if (ev.src_ip.empty() || ev.dst_ip.empty()) {
            why = "empty address";
            return std::nullopt;
        }
        for (int k = 0; k < 2; ++k) {
            const auto p = parse_int(f[4 + k]);
            if (!p) {
                why = "invalid port";
                return std::nullopt;
            }
            if (*p < 0 || *p > 65535) {
                why = "port out of range";
                return std::nullopt;
            }
            (k == 0 ? ev.src_port : ev.dst_port) = static_cast<std::uint16_t>(*p);
        }
        const auto sig = trim(f[6]);
        if (sig.empty()) {
            why = "empty sig_name";
            return std::nullopt;
        }
        if (auto label = opts.signatures.resolve(sig)) {
            ev.sig_name = *label;
        } else {
            ev.sig_name = std::string(sig);
            ev.known_signature = false;
        }
        const auto comp = ComponentId::try_parse(f[7]);
        if (!comp || !comp->is_cyber()) {
            why = "invalid component";
            return std::nullopt;
        }
        ev.component = *comp;
        return ev;
    }
};

// 10/15-12:34:56.123456  [**] [1:2000:1] msg [**] [Classification: x] [Priority: 1] {TCP} a:p -> b:q
const std::regex& snort_fast_regex() {
    static const std::regex re(
        R"(^(\d{2})/(\d{2})(?:/(\d{2}))?-(\d{2}):(\d{2}):(\d{2}(?:\.\d+)?)\s+\[\*\*\]\s+\[(\d+):(\d+):(\d+)\]\s+(.*?)\s+\[\*\*\].*\{(\w+)\}\s+([^\s:]+)(?::(\d+))?\s+->\s+([^\s:]+)(?::(\d+))?\s*$)");
    return re;
}

std::optional<AlarmEvent> parse_snort_line(const std::string& line, std::size_t line_no,
                                           const AlarmParseOptions& opts, std::string& why) {
    std::smatch m;
    if (!std::regex_match(line, m, snort_fast_regex())) {
        why = "not a snort fast alert";
        return std::nullopt;
    }
    const int month = std::stoi(m[1]);
    const int day = std::stoi(m[2]);
    const int year = m[3].matched ? 2000 + std::stoi(m[3]) : opts.snort_year;
    const auto t = civil_to_epoch(year, month, day, std::stoi(m[4]), std::stoi(m[5]),
                                  *parse_double(m[6].str()));
    if (!t) {
        why = "invalid time";
        return std::nullopt;
    }
    AlarmEvent ev;
    ev.cid = fmt::format("L{}", line_no);
    ev.time = *t;
    ev.src_ip = m[12];
    ev.dst_ip = m[14];
    for (int k = 0; k < 2; ++k) {
        const auto& g = m[k == 0 ? 13 : 15];
        if (!g.matched) continue;
        const auto p = parse_int(g.str());
        if (!p || *p > 65535) {
            why = "port out of range";
            return std::nullopt;
        }
        (k == 0 ? ev.src_port : ev.dst_port) = static_cast<std::uint16_t>(*p);
    }
    const std::string msg = m[10];
    if (auto label = opts.signatures.resolve(msg)) {
        ev.sig_name = *label;
    } else {
        ev.sig_name = msg;
        ev.known_signature = false;
    }
    ev.component = opts.snort_sensor;
    return ev;
}

}  // namespace

AlarmParseResult parse_alarm_log(std::istream& in, AlarmLogFormat format,
                                 const AlarmParseOptions& options) {
    if (!in) throw IoError("alarm log stream is not readable");
    AlarmParseResult result;
    CsvLineParser csv{options};
    std::string line;
    std::size_t line_no = 0;
    std::size_t data_lines = 0;
    bool header_seen = format != AlarmLogFormat::Csv;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (!header_seen) {
            if (line != kAlarmCsvHeader)
                throw FormatError("alarm CSV header must be '" + std::string(kAlarmCsvHeader) + "'");
            header_seen = true;
            continue;
        }
        if (format == AlarmLogFormat::Csv && line.front() == '#') continue;
        ++data_lines;
        std::string why;
        auto ev = format == AlarmLogFormat::Csv ? csv.parse(line, why)
                                                : parse_snort_line(line, line_no, options, why);
        if (ev) {
            result.events.push_back(std::move(*ev));
        } else {
            result.rejects.push_back({line_no, why});
        }
    }
    if (in.bad()) throw IoError("error while reading alarm log");
    if (data_lines > 0 && result.events.empty())
        throw FormatError(fmt::format("none of {} alarm lines could be parsed", data_lines));
    return result;
}

std::string write_alarm_csv(std::span<const AlarmEvent> events) {
    std::string out(kAlarmCsvHeader);
    out += '\n';
    for (const auto& e : events) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(e.cid), format_double(e.time),
                           csv_field(e.src_ip), csv_field(e.dst_ip), e.src_port, e.dst_port,
                           csv_field(e.sig_name), e.component.str());
    }
    return out;
}

std::string write_rejects_csv(std::span<const RejectedLine> rejects) {
    std::string out = "line_number,reason\n";
    for (const auto& r : rejects) out += fmt::format("{},{}\n", r.line_number, csv_field(r.reason));
    return out;
}

std::vector<FeatureVector> encode_alarms(std::span<const AlarmEvent> events,
                                         const EncoderConfig& cfg) {
    if (events.empty()) throw DegenerateInput("cannot encode an empty alarm batch");
    if (cfg.hash_buckets == 0) throw ConfigError("hash_buckets must be positive");
    const auto [lo, hi] = std::minmax_element(
        events.begin(), events.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
    const double t0 = lo->time;
    const double span = hi->time - lo->time;
    const std::size_t B = cfg.hash_buckets;

    std::vector<FeatureVector> out;
    out.reserve(events.size());
    for (const auto& e : events) {
        FeatureVector v(cfg.dimension(), 0.0);
        v[0] = span > 0.0 ? cfg.time_weight * (e.time - t0) / span : 0.0;
        v[1] = cfg.port_weight * e.src_port / 65535.0;
        v[2] = cfg.port_weight * e.dst_port / 65535.0;
        auto hot = [&](std::size_t block, std::string_view value, double w) {
            v[3 + block * B + fnv1a64(value) % B] = w;
        };
        hot(0, e.src_ip, cfg.ip_weight);
        hot(1, e.dst_ip, cfg.ip_weight);
        hot(2, e.sig_name, cfg.sig_weight);
        hot(3, e.component.str(), cfg.component_weight);
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<AlarmEvent> aggregate(std::span<const AlarmEvent> events,
                                  std::span<const std::size_t> clusters, double merge_window) {
    if (clusters.size() != events.size())
        throw ShapeError("cluster assignment does not match the event list");
    using Key = std::tuple<std::size_t, std::string, std::string, std::string, ComponentId>;
    std::map<Key, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        groups[{clusters[i], e.sig_name, e.src_ip, e.dst_ip, e.component}].push_back(i);
    }
    auto earlier = [&](std::size_t a, std::size_t b) {
        return std::tie(events[a].time, events[a].cid) < std::tie(events[b].time, events[b].cid);
    };
    std::vector<AlarmEvent> out;
    for (auto& [_, idx] : groups) {
        std::sort(idx.begin(), idx.end(), earlier);
        AlarmEvent* rep = nullptr;
        for (auto i : idx) {
            if (rep && events[i].time - rep->time <= merge_window) {
                rep->count += events[i].count;
                continue;
            }
            out.push_back(events[i]);
            rep = &out.back();
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.time, a.cid) < std::tie(b.time, b.cid);
    });
    return out;
}

std::vector<AlarmEvent> aggregate(std::span<const AlarmEvent> events, const FcmResult& result,
                                  double merge_window) {
    const auto clusters = hard_assignment(result);
    return aggregate(events, clusters, merge_window);
}

}  // namespace cpsmine
