#include "cpsmine/criteria.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cpsmine/error.hpp"
#include "cpsmine/util.hpp"

namespace cpsmine {

void CriteriaConfig::validate() const {
    for (double e : {eps1, eps2, eps3, eps4, eps_zero, mutation_fraction})
        if (!std::isfinite(e) || e < 0.0) throw ConfigError("criteria thresholds must be finite and >= 0");
    if (window < 1) throw ConfigError("criteria window must be at least 1 sample");
    if (tau_delta < 1) throw ConfigError("tau_delta must be at least 1 sample");
}

namespace {

void require_length(std::span<const PmuSample> w, std::size_t n) {
    if (w.size() < n)
        throw WindowTooShort(fmt::format("window has {} samples, {} required", w.size(), n));
}

double angle_imbalance(const PmuSample& s, Signal a, Signal b, Signal c) {
    const double ab = wrap_degrees(s[a] - s[b]);
    const double bc = wrap_degrees(s[b] - s[c]);
    return std::abs(wrap_degrees(ab - bc));
}

double magnitude_imbalance(const PmuSample& s, Signal a, Signal b, Signal c) {
    return std::abs((s[a] - s[b]) - (s[b] - s[c]));
}

double floor_to_zero(double v, double floor) { return std::abs(v) < floor ? 0.0 : v; }

/// max_p |X_p - mean| / mean * 100; nullopt when the mean is 0.
std::optional<double> fluctuation(const PmuSample& s, Signal a, Signal b, Signal c) {
    const double mean = (s[a] + s[b] + s[c]) / 3.0;
    if (mean == 0.0) return std::nullopt;
    const double dev = std::max({std::abs(s[a] - mean), std::abs(s[b] - mean), std::abs(s[c] - mean)});
    return dev / mean * 100.0;
}

}  // namespace

bool check_feature1(std::span<const PmuSample> w, const CriteriaConfig& cfg) {
    require_length(w, std::max<std::size_t>(cfg.window, 1));
    return std::all_of(w.begin(), w.end(), [&](const PmuSample& s) {
        return angle_imbalance(s, Signal::VaAngle, Signal::VbAngle, Signal::VcAngle) >= cfg.eps1 ||
               magnitude_imbalance(s, Signal::VaMag, Signal::VbMag, Signal::VcMag) >= cfg.eps2 ||
               magnitude_imbalance(s, Signal::IaMag, Signal::IbMag, Signal::IcMag) >= cfg.eps3;
    });
}

bool check_feature2(std::span<const PmuSample> w, const CriteriaConfig& cfg) {
    require_length(w, std::max<std::size_t>(cfg.window, 1));
    return std::all_of(w.begin(), w.end(), [&](const PmuSample& s) {
        return std::abs(s.i_neg()) > cfg.eps_zero || std::abs(s.i_zero()) > cfg.eps_zero;
    });
}

bool check_feature3(std::span<const PmuSample> w, const CriteriaConfig& cfg) {
    require_length(w, std::max<std::size_t>(cfg.window, 2));
    const double z0 = w.front().z();
    std::size_t compared = 0;
    for (std::size_t t = 1; t < w.size(); ++t) {
        const double z = w[t].z();
        if (z == 0.0) {
            spdlog::debug("{} t={}: zero impedance, sample skipped", w[t].source, w[t].time);
            continue;
        }
        ++compared;
        if (!(std::abs((z - z0) / z) > cfg.eps4)) return false;
    }
    return compared > 0;
}

std::set<Feature> fired_features(std::span<const PmuSample> w, const CriteriaConfig& cfg) {
    std::set<Feature> out;
    if (check_feature1(w, cfg)) out.insert(Feature::F1);
    if (check_feature2(w, cfg)) out.insert(Feature::F2);
    if (check_feature3(w, cfg)) out.insert(Feature::F3);
    return out;
}

std::vector<AbnormalWindow> screen_candidates(const PmuSeries& series, const CriteriaConfig& cfg) {
    cfg.validate();
    const std::size_t len = std::max<std::size_t>(cfg.window, 2);
    std::vector<AbnormalWindow> out;
    for (const auto& [src, samples] : series) {
        if (samples.size() < len) continue;
        std::optional<AbnormalWindow> open;
        auto close = [&] {
            if (!open) return;
            open->start_time = samples[open->first].time;
            open->end_time = samples[open->last].time;
            open->samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(open->first),
                                 samples.begin() + static_cast<std::ptrdiff_t>(open->last) + 1);
            out.push_back(std::move(*open));
            open.reset();
        };
        for (std::size_t i = 0; i + len <= samples.size(); ++i) {
            const auto fired = fired_features(std::span(samples).subspan(i, len), cfg);
            if (fired.empty()) continue;
            if (open && i > open->last) close();
            if (!open) {
                open = AbnormalWindow{src, 0.0, 0.0, i, i + len - 1, {}, {}};
            }
            open->last = i + len - 1;
            open->fired.insert(fired.begin(), fired.end());
        }
        close();
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.start_time, a.source) < std::tie(b.start_time, b.source);
    });
    return out;
}

std::vector<AbnormalWindow> normal_windows(const PmuSeries& series,
                                           std::span<const AbnormalWindow> fired,
                                           const CriteriaConfig& cfg) {
    cfg.validate();
    const std::size_t len = std::max<std::size_t>(cfg.window, 2 * cfg.tau_delta + 1);
    std::vector<AbnormalWindow> out;
    for (const auto& [src, samples] : series) {
        std::vector<bool> busy(samples.size(), false);
        for (const auto& w : fired)
            if (w.source == src)
                for (std::size_t i = w.first; i <= w.last && i < busy.size(); ++i) busy[i] = true;
        std::size_t i = 0;
        while (i + len <= samples.size()) {
            const auto hit = std::find(busy.begin() + static_cast<std::ptrdiff_t>(i),
                                       busy.begin() + static_cast<std::ptrdiff_t>(i + len), true);
            if (hit != busy.begin() + static_cast<std::ptrdiff_t>(i + len)) {
                i = static_cast<std::size_t>(hit - busy.begin()) + 1;
                continue;
            }
            AbnormalWindow w{src, samples[i].time, samples[i + len - 1].time, i, i + len - 1, {}, {}};
            w.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(i),
                             samples.begin() + static_cast<std::ptrdiff_t>(i + len));
            out.push_back(std::move(w));
            i += len;
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.start_time, a.source) < std::tie(b.start_time, b.source);
    });
    return out;
}

IndicatorVector indicators(std::span<const PmuSample> w, const CriteriaConfig& cfg) {
    require_length(w, std::max<std::size_t>(1, 2 * cfg.tau_delta + 1));
    IndicatorVector r;
    const double n = static_cast<double>(w.size());
    for (const auto& s : w) {
        r.eta_u += std::abs(wrap_degrees(s[Signal::VaAngle] - s[Signal::VbAngle])) -
                   std::abs(wrap_degrees(s[Signal::VbAngle] - s[Signal::VcAngle]));
        r.eta_i += std::abs(wrap_degrees(s[Signal::IaAngle] - s[Signal::IbAngle])) -
                   std::abs(wrap_degrees(s[Signal::IbAngle] - s[Signal::IcAngle]));
        const auto di = fluctuation(s, Signal::IaMag, Signal::IbMag, Signal::IcMag);
        const auto du = fluctuation(s, Signal::VaMag, Signal::VbMag, Signal::VcMag);
        if (!di || !du) r.degenerate_mean = true;
        if (di) r.delta_i = std::max(r.delta_i, *di);
        if (du) r.delta_u = std::max(r.delta_u, *du);
    }
    r.eta_u /= n;
    r.eta_i /= n;

    const std::size_t d = cfg.tau_delta;
    const double f = cfg.mutation_fraction;
    for (auto get : {&PmuSample::i_zero, &PmuSample::i_neg}) {
        for (std::size_t t = d; t + d < w.size() && r.tau == 0; ++t) {
            const double prev = floor_to_zero((w[t - d].*get)(), cfg.eps_zero);
            const double cur = floor_to_zero((w[t].*get)(), cfg.eps_zero);
            const double next = floor_to_zero((w[t + d].*get)(), cfg.eps_zero);
            if (std::abs(cur - prev) > f * prev && std::abs(next - cur) > f * cur) r.tau = 1;
        }
    }
    return r;
}

}  // namespace cpsmine
