#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "cpsmine/pmu.hpp"

namespace cpsmine {

/// Thresholds for the three abnormal-feature checks and the indicators.
/// Voltages in V, currents in A, angles in degrees, windows in samples.
struct CriteriaConfig {
    double eps1 = 5.0;      ///< phase-angle imbalance
    double eps2 = 2000.0;   ///< voltage-magnitude imbalance
    double eps3 = 20.0;     ///< current-magnitude imbalance
    double eps4 = 0.2;      ///< relative impedance change
    double eps_zero = 2.0;  ///< noise floor for sequence currents (0.5% of 400 A rated)
    std::size_t window = 5;
    std::size_t tau_delta = 1;
    double mutation_fraction = 0.2;

    /// Throws ConfigError.
    void validate() const;
};

enum class Feature { F1 = 1, F2 = 2, F3 = 3 };

/// For every sample: |(phiA-phiB) - (phiB-phiC)| >= eps1 (differences taken
/// on the circle), or the same expression over voltage magnitudes >= eps2,
/// or over current magnitudes >= eps3. Throws WindowTooShort when the window
/// is shorter than cfg.window.
bool check_feature1(std::span<const PmuSample> window, const CriteriaConfig& cfg);

/// For every sample: I- > eps_zero or I0 > eps_zero.
bool check_feature2(std::span<const PmuSample> window, const CriteriaConfig& cfg);

/// For every later sample t: |(z(t) - z(t0)) / z(t)| > eps4, t0 the first
/// sample. Samples with z(t) = 0 are skipped; a window with nothing left to
/// compare does not fire.
bool check_feature3(std::span<const PmuSample> window, const CriteriaConfig& cfg);

std::set<Feature> fired_features(std::span<const PmuSample> window, const CriteriaConfig& cfg);

struct AbnormalWindow {
    std::string source;
    double start_time = 0.0;
    double end_time = 0.0;
    std::size_t first = 0;  ///< index into the source series
    std::size_t last = 0;   ///< inclusive
    std::set<Feature> fired;
    std::vector<PmuSample> samples;
};

/// Slides a window of cfg.window samples (stride 1) over every source and
/// merges overlapping fired windows into maximal ones. Output is disjoint per
/// source and sorted by (start_time, source).
std::vector<AbnormalWindow> screen_candidates(const PmuSeries& series, const CriteriaConfig& cfg);

/// Non-overlapping windows of cfg.window samples that touch no fired window,
/// tiled from the start of each source. Used as Normal training rows.
std::vector<AbnormalWindow> normal_windows(const PmuSeries& series,
                                           std::span<const AbnormalWindow> fired,
                                           const CriteriaConfig& cfg);

struct IndicatorVector {
    double eta_u = 0.0;    ///< degrees
    double eta_i = 0.0;    ///< degrees
    double delta_i = 0.0;  ///< percent
    double delta_u = 0.0;  ///< percent
    int tau = 0;
    /// Set when a three-phase mean was 0 and the affected delta was taken as 0.
    bool degenerate_mean = false;

    bool operator==(const IndicatorVector&) const = default;
};

/// eta: window mean of |phiA-phiB| - |phiB-phiC| (voltage / current angles).
/// delta: max over samples and phases of |X_p - mean| / mean * 100.
/// tau: 1 when some interior sample t of I0 or I- satisfies the two-sided
/// jump test against t - tau_delta and t + tau_delta; values below eps_zero
/// count as 0. Throws WindowTooShort when the window is empty or shorter
/// than 2 * tau_delta + 1.
IndicatorVector indicators(std::span<const PmuSample> window, const CriteriaConfig& cfg);

}  // namespace cpsmine
