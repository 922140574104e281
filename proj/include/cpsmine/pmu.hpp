#pragma once

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cpsmine {

/// The 29 per-PMU measurement columns, in table order.
enum class Signal : std::size_t {
    VaAngle, VbAngle, VcAngle,        // PA1:VH .. PA3:VH
    VaMag, VbMag, VcMag,              // PM1:V  .. PM3:V
    IaAngle, IbAngle, IcAngle,        // PA4:IH .. PA6:IH
    IaMag, IbMag, IcMag,              // PM4:I  .. PM6:I
    VPosAngle, VNegAngle, VZeroAngle, // PA7:VH .. PA9:VH
    VPosMag, VNegMag, VZeroMag,       // PM7:V  .. PM9:V
    IPosAngle, INegAngle, IZeroAngle, // PA10:VH .. PA12:VH
    IPosMag, INegMag, IZeroMag,       // PM10:V .. PM12:V
    Freq,                             // F
    DFreq,                            // DF
    ZMag,                             // PA:Z
    ZAngle,                           // PA:ZH
    Status,                           // S
};

inline constexpr std::size_t kSignalCount = 29;

/// Canonical column suffix, e.g. "PM7:V".
std::string_view signal_name(Signal s);
/// Accepts canonical names and the IH/I spellings of the sequence-current
/// columns ("PA10:IH", "PM12:I").
std::optional<Signal> parse_signal(std::string_view name);
bool is_angle(Signal s);
bool is_magnitude(Signal s);

/// One timestamped row of one PMU.
struct PmuSample {
    std::string source;  ///< "R1".."R4"
    double time = 0.0;
    std::array<double, kSignalCount> values{};
    std::optional<int> marker;

    double operator[](Signal s) const { return values[static_cast<std::size_t>(s)]; }
    double& operator[](Signal s) { return values[static_cast<std::size_t>(s)]; }

    double i_neg() const { return (*this)[Signal::INegMag]; }
    double i_zero() const { return (*this)[Signal::IZeroMag]; }
    double z() const { return (*this)[Signal::ZMag]; }
};

/// Per-source time series, each sorted by time.
using PmuSeries = std::map<std::string, std::vector<PmuSample>>;

struct PmuReject {
    std::size_t line_number = 0;
    std::string reason;
};

struct PmuParseResult {
    std::vector<std::string> sources;  ///< ascending
    std::vector<PmuSample> samples;    ///< row order, sources ascending within a row
    std::vector<PmuReject> rejects;
};

/// Parses a PMU CSV whose header carries "R<k>-<Signal>" tokens, an optional
/// "time" column (row index when absent) and an optional "marker" column.
/// Other columns are ignored. Angles are wrapped to (-180, 180]. A row with
/// a non-numeric value, a negative magnitude or the wrong width is rejected
/// as a whole. Throws SchemaError when a PMU lacks one of its 29 columns or
/// no PMU column is present.
PmuParseResult parse_pmu_csv(std::istream& in);

PmuSeries by_source(std::span<const PmuSample> samples);
/// Concatenates several parse results into one series (time-sorted).
PmuSeries merge_series(std::span<const PmuParseResult> parts);

/// Writes the series of one or more PMUs as a single CSV with a time column
/// and, when `with_marker`, a trailing marker column. All sources must share
/// the same timestamps.
std::string write_pmu_csv(const PmuSeries& series, bool with_marker);

std::string write_pmu_rejects_csv(std::span<const PmuReject> rejects);

}  // namespace cpsmine
