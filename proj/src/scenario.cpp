#include "cpsmine/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>

#include <fmt/format.h>

#include "cpsmine/cas.hpp"
#include "cpsmine/error.hpp"
#include "cpsmine/util.hpp"

namespace cpsmine {

using nlohmann::json;

EpisodeKind parse_episode_kind(std::string_view text) {
    if (text == "data_injection") return EpisodeKind::DataInjection;
    if (text == "command_injection") return EpisodeKind::CommandInjection;
    if (text == "relay_setting") return EpisodeKind::RelaySetting;
    if (text == "fault") return EpisodeKind::Fault;
    throw ScriptError(fmt::format("unknown episode kind '{}'", text));
}

std::string_view to_string(EpisodeKind kind) {
    switch (kind) {
        case EpisodeKind::DataInjection: return "data_injection";
        case EpisodeKind::CommandInjection: return "command_injection";
        case EpisodeKind::RelaySetting: return "relay_setting";
        case EpisodeKind::Fault: return "fault";
    }
    return "?";
}

std::set<Feature> intended_features(EpisodeKind kind) {
    switch (kind) {
        case EpisodeKind::DataInjection: return {Feature::F1};
        case EpisodeKind::CommandInjection: return {Feature::F2};
        case EpisodeKind::RelaySetting: return {Feature::F3};
        case EpisodeKind::Fault: return {Feature::F1, Feature::F2};
    }
    return {};
}

// --- script ------------------------------------------------------------------------

namespace {

json load_part(const json& j, const std::filesystem::path& base, const char* what) {
    if (!j.is_string()) return j;
    const auto path = base / j.get<std::string>();
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ScriptError(fmt::format("{} file {}: {}", what, path.string(), e.what()));
    } catch (const IoError& e) {
        throw ScriptError(fmt::format("{} file: {}", what, e.what()));
    }
}

ComponentId cyber_in(const TopologyMap& topo, const std::string& text) {
    const auto id = ComponentId::try_parse(text);
    if (!id || !id->is_cyber() || !topo.contains(*id))
        throw ScriptError(fmt::format("'{}' is not a cyber component of the topology", text));
    return *id;
}

void check_physical(const ScenarioScript& s, int label, const std::string& source) {
    if (!is_scenario_label(label) || label == kNormalLabel)
        throw ScriptError(fmt::format("{} is not an attack/fault scenario label", label));
    if (std::find(s.pmus.begin(), s.pmus.end(), source) == s.pmus.end())
        throw ScriptError(fmt::format("unknown PMU '{}'", source));
    try {
        const auto pe = s.label_map.resolve(label, source);
        if (!s.topology.contains(pe))
            throw ScriptError(fmt::format("label {} maps to {}, absent from the topology", label, pe.str()));
    } catch (const UnknownLabelMapping& e) {
        throw ScriptError(e.what());
    }
}

std::size_t positive_count(const json& j, const char* key, std::size_t def) {
    const auto v = j.value(key, static_cast<long long>(def));
    if (v < 1) throw ScriptError(fmt::format("{} must be >= 1", key));
    return static_cast<std::size_t>(v);
}

}  // namespace

ScenarioScript parse_script(const json& j, const std::filesystem::path& base) {
    ScenarioScript s;
    try {
        s.seed = j.value("seed", std::uint64_t{0});
        s.start_time = j.value("start_time", s.start_time);
        s.sample_period = j.value("sample_period", s.sample_period);
        s.slot_seconds = j.value("slot_seconds", s.slot_seconds);
        s.lead = j.value("lead", s.lead);
        if (!(s.sample_period > 0.0) || !(s.slot_seconds > 0.0) || s.lead < 0.0)
            throw ScriptError("sample_period and slot_seconds must be > 0, lead >= 0");

        if (!j.contains("topology")) throw ScriptError("script has no topology");
        try {
            s.topology = TopologyMap::from_json(load_part(j.at("topology"), base, "topology"));
        } catch (const ValidationError& e) {
            throw ScriptError(std::string("topology: ") + e.what());
        } catch (const ParseError& e) {
            throw ScriptError(std::string("topology: ") + e.what());
        }
        if (j.contains("network")) {
            s.network = load_part(j.at("network"), base, "network");
        } else {
            json alarms = json::array();
            for (const auto& sig : SignatureDictionary::standard().entries()) alarms.push_back(sig.label);
            s.network = {{"alarms", alarms}, {"sequences", json::array()}, {"edges", json::array()}, {"leak", 0.0}};
        }
        try {
            (void)CausalNetwork::from_json(s.network);
        } catch (const Error& e) {
            throw ScriptError(std::string("network: ") + e.what());
        }
        if (j.contains("label_map")) {
            try {
                s.label_map = LabelMap::from_json(load_part(j.at("label_map"), base, "label map"));
            } catch (const ScriptError&) {
                throw;
            } catch (const Error& e) {
                throw ScriptError(e.what());
            }
        }
        if (j.contains("pmus")) s.pmus = j.at("pmus").get<std::vector<std::string>>();
        static const std::regex pmu_re(R"(R\d+)");
        if (s.pmus.empty()) throw ScriptError("at least one PMU is required");
        for (const auto& p : s.pmus)
            if (!std::regex_match(p, pmu_re)) throw ScriptError(fmt::format("PMU name '{}' is not R<k>", p));

        auto physical_from = [&](const json& pj) {
            PhysicalPlan p;
            p.label = pj.at("label").get<int>();
            p.source = pj.at("source").get<std::string>();
            p.kind = parse_episode_kind(pj.at("kind").get<std::string>());
            p.delay = pj.value("delay", p.delay);
            p.duration = positive_count(pj, "duration", p.duration);
            if (p.delay < 0.0) throw ScriptError("physical delay must be >= 0");
            check_physical(s, p.label, p.source);
            return p;
        };

        std::set<std::string> ips;
        for (const auto& aj : j.value("attackers", json::array())) {
            AttackerPlan a;
            a.ip = aj.at("ip").get<std::string>();
            if (a.ip.empty() || !ips.insert(a.ip).second)
                throw ScriptError(fmt::format("attacker ip '{}' empty or repeated", a.ip));
            for (const auto& sj : aj.at("sessions")) {
                SessionPlan sp;
                for (const auto& st : sj.at("steps")) {
                    std::string sig, comp;
                    if (st.is_array()) {
                        sig = st.at(0).get<std::string>();
                        comp = st.at(1).get<std::string>();
                    } else {
                        sig = st.at("sig").get<std::string>();
                        comp = st.at("component").get<std::string>();
                    }
                    if (sig.empty()) throw ScriptError("step with empty signature");
                    sp.steps.emplace_back(sig, cyber_in(s.topology, comp));
                }
                if (sp.steps.empty()) throw ScriptError("session without steps");
                sp.step_gap = sj.value("step_gap", sp.step_gap);
                if (sp.step_gap < 0.0) throw ScriptError("step_gap must be >= 0");
                sp.repeat = positive_count(sj, "repeat", 1);
                if (sj.contains("physical")) sp.physical = physical_from(sj.at("physical"));
                double span = s.lead + static_cast<double>(sp.steps.size() - 1) * sp.step_gap;
                if (sp.physical)
                    span += sp.physical->delay +
                            static_cast<double>(sp.physical->duration + 10) * s.sample_period;
                if (span >= s.slot_seconds)
                    throw ScriptError(fmt::format("session of {} does not fit in a {} s slot", a.ip, s.slot_seconds));
                a.sessions.push_back(std::move(sp));
            }
            s.attackers.push_back(std::move(a));
        }
        for (const auto& dj : j.value("distractors", json::array())) {
            DistractorPlan d;
            d.label = dj.at("label").get<int>();
            d.source = dj.at("source").get<std::string>();
            d.kind = parse_episode_kind(dj.value("kind", "fault"));
            d.duration = positive_count(dj, "duration", d.duration);
            d.repeat = positive_count(dj, "repeat", 1);
            check_physical(s, d.label, d.source);
            s.distractors.push_back(d);
        }
        if (j.contains("noise")) {
            const auto& nj = j.at("noise");
            auto& n = s.noise;
            n.spurious_alarms = nj.value("spurious_alarms", n.spurious_alarms);
            n.spurious_signatures = nj.value("spurious_signatures", n.spurious_signatures);
            n.duplicate_bursts = nj.value("duplicate_bursts", n.duplicate_bursts);
            n.burst_size = nj.value("burst_size", n.burst_size);
            n.burst_spacing = nj.value("burst_spacing", n.burst_spacing);
            n.corrupt_lines = nj.value("corrupt_lines", n.corrupt_lines);
            n.time_jitter = nj.value("time_jitter", n.time_jitter);
            if (n.burst_size < 2 && n.duplicate_bursts > 0) throw ScriptError("burst_size must be >= 2");
            if (n.time_jitter < 0.0 || n.burst_spacing <= 0.0) throw ScriptError("invalid noise timing");
            if (n.spurious_alarms > 0 && n.spurious_signatures.empty())
                throw ScriptError("spurious alarms need spurious_signatures");
        }
        if (j.contains("training")) {
            const auto& tj = j.at("training");
            s.training_gap = tj.value("gap", s.training_gap);
            for (const auto& ej : tj.at("episodes")) {
                TrainingEpisode e;
                e.label = ej.at("label").get<int>();
                e.source = ej.at("source").get<std::string>();
                e.kind = parse_episode_kind(ej.at("kind").get<std::string>());
                e.count = positive_count(ej, "count", 1);
                e.duration = positive_count(ej, "duration", e.duration);
                check_physical(s, e.label, e.source);
                s.training.push_back(e);
            }
        }
        s.pipeline = j.value("pipeline", json::object());
        if (!s.pipeline.is_object()) throw ScriptError("pipeline overrides must be an object");
    } catch (const json::exception& e) {
        throw ScriptError(std::string("script: ") + e.what());
    }
    return s;
}

ScenarioScript load_script(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("script not found: " + path.string());
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ScriptError(path.string() + ": " + e.what());
    }
    return parse_script(j, path.parent_path());
}

// --- generation ------------------------------------------------------------------

namespace {

constexpr double kVoltage = 132790.0;
constexpr double kCurrent = 400.0;
constexpr double kImpedance = 100.0;

double jitter(Rng& rng, double a) { return uniform_real(rng, -a, a); }

PmuSample normal_sample(const std::string& src, std::size_t src_idx, double t, Rng& rng) {
    PmuSample s;
    s.source = src;
    s.time = t;
    s.marker = kNormalLabel;
    const double theta = -7.5 * static_cast<double>(src_idx);
    const double pf = 25.0;
    s[Signal::VaAngle] = wrap_degrees(theta + jitter(rng, 0.3));
    s[Signal::VbAngle] = wrap_degrees(theta - 120.0 + jitter(rng, 0.3));
    s[Signal::VcAngle] = wrap_degrees(theta + 120.0 + jitter(rng, 0.3));
    for (auto m : {Signal::VaMag, Signal::VbMag, Signal::VcMag}) s[m] = kVoltage + jitter(rng, 60.0);
    s[Signal::IaAngle] = wrap_degrees(theta - pf + jitter(rng, 0.3));
    s[Signal::IbAngle] = wrap_degrees(theta - pf - 120.0 + jitter(rng, 0.3));
    s[Signal::IcAngle] = wrap_degrees(theta - pf + 120.0 + jitter(rng, 0.3));
    for (auto m : {Signal::IaMag, Signal::IbMag, Signal::IcMag}) s[m] = kCurrent + jitter(rng, 1.0);
    s[Signal::VPosAngle] = s[Signal::VaAngle];
    s[Signal::VNegAngle] = wrap_degrees(uniform_real(rng, -180.0, 180.0));
    s[Signal::VZeroAngle] = wrap_degrees(uniform_real(rng, -180.0, 180.0));
    s[Signal::VPosMag] = kVoltage + jitter(rng, 20.0);
    s[Signal::VNegMag] = uniform_real(rng, 0.0, 20.0);
    s[Signal::VZeroMag] = uniform_real(rng, 0.0, 20.0);
    s[Signal::IPosAngle] = s[Signal::IaAngle];
    s[Signal::INegAngle] = wrap_degrees(uniform_real(rng, -180.0, 180.0));
    s[Signal::IZeroAngle] = wrap_degrees(uniform_real(rng, -180.0, 180.0));
    s[Signal::IPosMag] = kCurrent + jitter(rng, 1.0);
    s[Signal::INegMag] = uniform_real(rng, 0.0, 0.1);
    s[Signal::IZeroMag] = uniform_real(rng, 0.0, 0.1);
    s[Signal::Freq] = 60.0 + jitter(rng, 0.002);
    s[Signal::DFreq] = jitter(rng, 0.001);
    s[Signal::ZMag] = kImpedance * (1.0 + jitter(rng, 0.005));
    s[Signal::ZAngle] = 70.0 + jitter(rng, 0.3);
    s[Signal::Status] = 0.0;
    return s;
}

/// Overwrites samples [first, first + duration) with the episode's signature
/// behaviour. Margins stay at least 3x the default thresholds.
void apply_episode(std::vector<PmuSample>& v, std::size_t first, std::size_t duration,
                   EpisodeKind kind, int label, Rng& rng) {
    const double shift = 20.0 + uniform_real(rng, 0.0, 5.0);
    for (std::size_t k = 0; k < duration; ++k) {
        auto& s = v[first + k];
        s.marker = label;
        switch (kind) {
            case EpisodeKind::DataInjection:
                s[Signal::VaAngle] = wrap_degrees(s[Signal::VaAngle] + shift);
                break;
            case EpisodeKind::CommandInjection: {
                const double level = std::min(50.0, 10.0 * std::pow(1.5, static_cast<double>(k)));
                s[Signal::IZeroMag] = level + uniform_real(rng, 0.0, 0.5);
                s[Signal::INegMag] = level + uniform_real(rng, 0.0, 0.5);
                break;
            }
            case EpisodeKind::RelaySetting:
                s[Signal::ZMag] *= 0.3 * std::pow(0.6, static_cast<double>(k));
                s[Signal::ZAngle] = wrap_degrees(s[Signal::ZAngle] + 30.0);
                break;
            case EpisodeKind::Fault:
                s[Signal::IaMag] *= 3.0;
                s[Signal::IZeroMag] = 100.0 + uniform_real(rng, 0.0, 1.0);
                s[Signal::INegMag] = 60.0 + uniform_real(rng, 0.0, 1.0);
                break;
        }
    }
}

std::uint16_t service_port(const std::string& sig) {
    static const std::map<std::string, std::uint16_t> ports = {
        {"s1", 22}, {"s2", 21}, {"s3", 514}, {"s4", 445}, {"s5", 111}, {"s6", 3389}, {"s7", 80}, {"s8", 23}};
    const auto it = ports.find(sig);
    return it == ports.end() ? 80 : it->second;
}

std::string host_of(const ComponentId& c) { return fmt::format("192.168.1.{}", c.index); }

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

bool first_occurrence_order(const AttackRecord& r, const std::vector<Item>& seq) {
    long prev = -1;
    for (const auto& item : seq) {
        long pos = -1;
        for (std::size_t i = 0; i < r.steps.size(); ++i)
            if (r.steps[i].item == item) {
                pos = static_cast<long>(i);
                break;
            }
        if (pos <= prev) return false;
        prev = pos;
    }
    return true;
}

json features_json(const std::set<Feature>& f) {
    json a = json::array();
    for (auto x : f) a.push_back(static_cast<int>(x));
    return a;
}

struct ScheduledSession {
    std::size_t attacker;
    const SessionPlan* plan;
};

struct PhysicalSlot {
    std::optional<ScheduledSession> session;
    const DistractorPlan* distractor = nullptr;
};

}  // namespace

Bundle generate(const ScenarioScript& script) {
    Bundle b;
    Rng rng_sched(derive_seed(script.seed, 1));
    Rng rng_pmu(derive_seed(script.seed, 2));
    Rng rng_alarm(derive_seed(script.seed, 3));
    Rng rng_train(derive_seed(script.seed, 4));

    // schedule: physical sessions and distractors first, cyber-only after
    std::vector<PhysicalSlot> phys;
    std::vector<ScheduledSession> cyber_only;
    for (std::size_t a = 0; a < script.attackers.size(); ++a)
        for (const auto& sp : script.attackers[a].sessions)
            for (std::size_t r = 0; r < sp.repeat; ++r) {
                if (sp.physical)
                    phys.push_back({ScheduledSession{a, &sp}, nullptr});
                else
                    cyber_only.push_back({a, &sp});
            }
    for (const auto& d : script.distractors)
        for (std::size_t r = 0; r < d.repeat; ++r) phys.push_back({std::nullopt, &d});
    shuffle(phys, rng_sched);
    shuffle(cyber_only, rng_sched);

    const double period = script.sample_period;
    const double slot = script.slot_seconds;
    const std::size_t phys_slots = std::max<std::size_t>(1, phys.size());
    const auto n_samples = static_cast<std::size_t>(std::llround(static_cast<double>(phys_slots) * slot / period));
    for (std::size_t i = 0; i < n_samples; ++i)
        for (std::size_t p = 0; p < script.pmus.size(); ++p)
            b.test_series[script.pmus[p]].push_back(
                normal_sample(script.pmus[p], p, script.start_time + static_cast<double>(i) * period, rng_pmu));

    auto sample_at = [&](double t) {
        return static_cast<std::size_t>(std::ceil((t - script.start_time) / period - 1e-9));
    };

    std::vector<AlarmEvent> alarms;
    json gt_cas = json::array();
    auto emit_session = [&](const ScheduledSession& ss, double slot_start) -> std::pair<AttackRecord, double> {
        const auto& ip = script.attackers[ss.attacker].ip;
        const auto src_port = static_cast<std::uint16_t>(1024 + uniform_index(rng_alarm, 64511));
        AttackRecord rec{ip, {}};
        json steps = json::array();
        double t = slot_start + script.lead;
        double last = t;
        for (std::size_t i = 0; i < ss.plan->steps.size(); ++i) {
            const auto& [sig, comp] = ss.plan->steps[i];
            const double at = t + static_cast<double>(i) * ss.plan->step_gap +
                              (script.noise.time_jitter > 0 ? jitter(rng_alarm, script.noise.time_jitter) : 0.0);
            AlarmEvent e;
            e.time = at;
            e.src_ip = ip;
            e.dst_ip = host_of(comp);
            e.src_port = src_port;
            e.dst_port = service_port(sig);
            e.sig_name = sig;
            e.component = comp;
            alarms.push_back(e);
            rec.steps.push_back({Item{sig, comp}, at});
            steps.push_back({{"sig_name", sig}, {"component", comp.str()}, {"time", at}});
            last = at;
        }
        gt_cas.push_back({{"attacker", ip}, {"steps", steps}});
        return {rec, last};
    };

    json gt_pae = json::array();
    for (std::size_t k = 0; k < phys.size(); ++k) {
        const double slot_start = script.start_time + static_cast<double>(k) * slot;
        int label;
        std::string source;
        EpisodeKind kind;
        std::size_t duration;
        double onset;
        std::string attacker;
        std::optional<AttackRecord> rec;
        if (phys[k].session) {
            const auto& pp = *phys[k].session->plan->physical;
            auto [r, last] = emit_session(*phys[k].session, slot_start);
            onset = last + pp.delay;
            label = pp.label;
            source = pp.source;
            kind = pp.kind;
            duration = pp.duration;
            attacker = r.aid;
            rec = std::move(r);
        } else {
            const auto& d = *phys[k].distractor;
            onset = slot_start + script.lead;
            label = d.label;
            source = d.source;
            kind = d.kind;
            duration = d.duration;
        }
        const std::size_t first = sample_at(onset);
        auto& series = b.test_series.at(source);
        if (first + duration + 1 >= series.size()) throw ScriptError("episode runs past the PMU trace");
        apply_episode(series, first, duration, kind, label, rng_pmu);
        Episode ep{"test", source, label, kind, first, first + duration - 1, series[first].time,
                   intended_features(kind), attacker};
        const auto pe = script.label_map.resolve(label, source);
        gt_pae.push_back({{"label", label},
                          {"component", pe.str()},
                          {"source", source},
                          {"kind", to_string(kind)},
                          {"onset", ep.onset_time},
                          {"first", ep.first},
                          {"last", ep.last},
                          {"features", features_json(ep.intended)},
                          {"attacker", attacker}});
        if (rec) {
            rec->steps.push_back({Item{"e" + std::to_string(label), pe}, ep.onset_time});
            b.records.push_back(std::move(*rec));
        }
        b.episodes.push_back(std::move(ep));
    }
    for (std::size_t k = 0; k < cyber_only.size(); ++k) {
        const double slot_start = script.start_time + static_cast<double>(phys_slots + k) * slot;
        b.records.push_back(emit_session(cyber_only[k], slot_start).first);
    }
    std::stable_sort(b.records.begin(), b.records.end(), [](const auto& x, const auto& y) {
        return std::tie(x.aid, x.steps.front().time) < std::tie(y.aid, y.steps.front().time);
    });

    // alarm noise
    const std::size_t scripted = alarms.size();
    const double horizon = script.start_time + static_cast<double>(phys_slots + cyber_only.size()) * slot;
    // bases drawn without replacement so every burst stays its own group
    std::vector<std::size_t> bases(scripted);
    std::iota(bases.begin(), bases.end(), std::size_t{0});
    for (std::size_t k = 0; k < script.noise.duplicate_bursts && k < scripted; ++k) {
        std::swap(bases[k], bases[k + uniform_index(rng_alarm, scripted - k)]);
        const auto base = alarms[bases[k]];
        for (std::size_t r = 1; r < script.noise.burst_size; ++r) {
            auto dup = base;
            dup.time = base.time + static_cast<double>(r) * script.noise.burst_spacing;
            alarms.push_back(dup);
        }
        ++b.duplicate_bursts;
    }
    std::vector<ComponentId> cyber(script.topology.cyber_nodes().begin(), script.topology.cyber_nodes().end());
    for (std::size_t k = 0; k < script.noise.spurious_alarms && !cyber.empty(); ++k) {
        AlarmEvent e;
        e.time = std::floor(uniform_real(rng_alarm, script.start_time, horizon));
        e.src_ip = fmt::format("172.16.0.{}", 1 + uniform_index(rng_alarm, 200));
        e.component = cyber[uniform_index(rng_alarm, cyber.size())];
        e.dst_ip = host_of(e.component);
        e.src_port = static_cast<std::uint16_t>(1024 + uniform_index(rng_alarm, 64511));
        e.sig_name = script.noise.spurious_signatures[uniform_index(rng_alarm, script.noise.spurious_signatures.size())];
        e.dst_port = service_port(e.sig_name);
        alarms.push_back(e);
    }
    std::stable_sort(alarms.begin(), alarms.end(), [](const auto& x, const auto& y) { return x.time < y.time; });
    for (std::size_t i = 0; i < alarms.size(); ++i) alarms[i].cid = fmt::format("A{:06}", i + 1);
    b.alarms = alarms;

    auto csv = write_alarm_csv(alarms);
    if (script.noise.corrupt_lines > 0 && !alarms.empty()) {
        std::vector<std::string> lines;
        std::size_t pos = 0;
        while (pos < csv.size()) {
            const auto nl = csv.find('\n', pos);
            lines.push_back(csv.substr(pos, nl - pos));
            pos = nl + 1;
        }
        for (std::size_t k = 0; k < script.noise.corrupt_lines; ++k) {
            const auto& src = alarms[uniform_index(rng_alarm, alarms.size())];
            std::string bad;
            switch (k % 3) {
                case 0:
                    bad = fmt::format("X{:06},{},{},{},{},70000,{},{}", k, format_double(src.time), src.src_ip,
                                      src.dst_ip, src.src_port, src.sig_name, src.component.str());
                    break;
                case 1:
                    bad = fmt::format("X{:06},{},{},{}", k, format_double(src.time), src.src_ip, src.dst_ip);
                    break;
                default:
                    bad = fmt::format("X{:06},not-a-time,{},{},{},{},{},{}", k, src.src_ip, src.dst_ip,
                                      src.src_port, src.dst_port, src.sig_name, src.component.str());
                    break;
            }
            // never in front of the first data line: it fixes the time format
            const auto at = 2 + uniform_index(rng_alarm, lines.size() - 1);
            lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(std::min(at, lines.size())), bad);
        }
        csv.clear();
        for (const auto& l : lines) csv += l + "\n";
        b.corrupt_lines = script.noise.corrupt_lines;
    }
    b.files["alarms.csv"] = csv;

    // training trace
    if (!script.training.empty()) {
        std::vector<const TrainingEpisode*> order;
        for (const auto& e : script.training)
            for (std::size_t r = 0; r < e.count; ++r) order.push_back(&e);
        shuffle(order, rng_train);
        std::size_t total = script.training_gap;
        for (const auto* e : order) total += e->duration + script.training_gap;
        for (std::size_t i = 0; i < total; ++i)
            for (std::size_t p = 0; p < script.pmus.size(); ++p)
                b.train_series[script.pmus[p]].push_back(
                    normal_sample(script.pmus[p], p, script.start_time + static_cast<double>(i) * period, rng_train));
        std::size_t at = script.training_gap;
        for (const auto* e : order) {
            auto& series = b.train_series.at(e->source);
            apply_episode(series, at, e->duration, e->kind, e->label, rng_train);
            b.episodes.push_back({"train", e->source, e->label, e->kind, at, at + e->duration - 1,
                                  series[at].time, intended_features(e->kind), ""});
            at += e->duration + script.training_gap;
        }
    }

    // planted patterns, counted over the scripted records
    std::set<std::string> aids;
    for (const auto& r : b.records) aids.insert(r.aid);
    std::vector<std::pair<std::vector<Item>, Item>> planted;
    for (const auto& r : b.records)
        if (r.steps.back().item.physical()) {
            std::vector<Item> ante;
            for (std::size_t i = 0; i + 1 < r.steps.size(); ++i) ante.push_back(r.steps[i].item);
            std::pair<std::vector<Item>, Item> key{ante, r.steps.back().item};
            if (std::find(planted.begin(), planted.end(), key) == planted.end()) planted.push_back(key);
        }
    json gt_patterns = json::array();
    for (const auto& [ante, cons] : planted) {
        PlantedPattern p{ante, cons, 0, 0, 0, aids.size()};
        auto full = ante;
        full.push_back(cons);
        std::set<std::string> who;
        for (const auto& r : b.records) {
            if (!first_occurrence_order(r, ante)) continue;
            ++p.antecedent_records;
            if (first_occurrence_order(r, full)) {
                ++p.records;
                who.insert(r.aid);
            }
        }
        p.attackers = who.size();
        std::string text = "[";
        for (std::size_t i = 0; i < ante.size(); ++i) text += (i ? " > " : "") + ante[i].str();
        text += " => " + cons.str() + "]";
        gt_patterns.push_back({{"pattern", text},
                               {"attackers", p.attackers},
                               {"records", p.records},
                               {"antecedent_records", p.antecedent_records},
                               {"total_attackers", p.total_attackers}});
        b.patterns.push_back(std::move(p));
    }

    // files
    for (const auto& [src, v] : b.test_series) {
        PmuSeries one{{src, v}};
        b.files[fmt::format("pmu_{}.csv", src)] = write_pmu_csv(one, true);
    }
    for (const auto& [src, v] : b.train_series) {
        PmuSeries one{{src, v}};
        b.files[fmt::format("train_pmu_{}.csv", src)] = write_pmu_csv(one, true);
    }
    b.files["topology.json"] = script.topology.serialize();
    b.files["network.json"] = script.network.dump(2) + "\n";
    b.files["label_map.json"] = script.label_map.to_json().dump(2) + "\n";

    json episodes = json::array();
    for (const auto& e : b.episodes)
        episodes.push_back({{"trace", e.trace},
                            {"source", e.source},
                            {"label", e.label},
                            {"kind", to_string(e.kind)},
                            {"first", e.first},
                            {"last", e.last},
                            {"onset", e.onset_time},
                            {"features", features_json(e.intended)},
                            {"attacker", e.attacker}});
    json records = json::array();
    for (const auto& r : b.records) {
        json steps = json::array();
        for (const auto& s : r.steps)
            steps.push_back({{"item", s.item.label}, {"component", s.item.component.str()}, {"time", s.time}});
        records.push_back({{"aid", r.aid}, {"steps", steps}});
    }
    std::vector<std::string> attacker_ips;
    for (const auto& a : script.attackers) attacker_ips.push_back(a.ip);
    b.ground_truth = {{"schema_version", 1},
                      {"seed", script.seed},
                      {"attackers", attacker_ips},
                      {"cas", gt_cas},
                      {"pae", gt_pae},
                      {"episodes", episodes},
                      {"records", records},
                      {"patterns", gt_patterns},
                      {"alarms",
                       {{"clean", b.alarms.size()},
                        {"scripted", scripted},
                        {"corrupt_lines", b.corrupt_lines},
                        {"duplicate_bursts", b.duplicate_bursts},
                        {"burst_size", script.noise.burst_size},
                        {"spurious", script.noise.spurious_alarms}}}};
    b.files["ground_truth.json"] = b.ground_truth.dump(2) + "\n";

    json pmu_files = json::array(), train_files = json::array();
    for (const auto& p : script.pmus) {
        pmu_files.push_back(fmt::format("pmu_{}.csv", p));
        if (!b.train_series.empty()) train_files.push_back(fmt::format("train_pmu_{}.csv", p));
    }
    json config = {{"schema_version", 1},
                   {"seed", script.seed},
                   {"paths",
                    {{"alarms", json::array({"alarms.csv"})},
                     {"alarm_format", "csv"},
                     {"pmu", pmu_files},
                     {"topology", "topology.json"},
                     {"network", "network.json"},
                     {"label_map", "label_map.json"},
                     {"output", "out"}}},
                   {"mining", {{"alpha", 30}, {"beta", 30}}}};
    if (!train_files.empty()) config["paths"]["pmu_train"] = train_files;
    config.merge_patch(script.pipeline);
    b.files["config.json"] = config.dump(2) + "\n";
    return b;
}

void write_bundle(const Bundle& bundle, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    for (const auto& [name, content] : bundle.files) write_file(dir / name, content);
}

}  // namespace cpsmine
