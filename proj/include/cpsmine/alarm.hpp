#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpsmine/topology.hpp"

namespace cpsmine {

/// One cyber alarm: the seven-tuple (cid, time, src/dst address, src/dst
/// port, signature) plus the reporting cyber component.
struct AlarmEvent {
    std::string cid;
    double time = 0.0;  ///< epoch seconds
    std::string src_ip;
    std::string dst_ip;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::string sig_name;
    ComponentId component;
    /// Number of raw alarms represented; > 1 after aggregation.
    std::uint32_t count = 1;
    /// False when sig_name is not in the signature dictionary.
    bool known_signature = true;

    bool operator==(const AlarmEvent&) const = default;
};

struct Signature {
    std::string label;  ///< e.g. "s5"
    std::string name;   ///< e.g. "sadmind_ping"
};

class SignatureDictionary {
public:
    SignatureDictionary() = default;
    explicit SignatureDictionary(std::vector<Signature> sigs);

    /// The eight alarm types used by the testbed logs (s1..s8).
    static SignatureDictionary standard();

    /// Resolves a label or a case-insensitive name to its label.
    std::optional<std::string> resolve(std::string_view label_or_name) const;
    const std::vector<Signature>& entries() const { return sigs_; }

private:
    std::vector<Signature> sigs_;
};

enum class AlarmLogFormat { Csv, SnortFast };

AlarmLogFormat parse_alarm_format(std::string_view text);

struct RejectedLine {
    std::size_t line_number = 0;  ///< 1-based, header included
    std::string reason;
};

struct AlarmParseResult {
    std::vector<AlarmEvent> events;
    std::vector<RejectedLine> rejects;
};

struct AlarmParseOptions {
    SignatureDictionary signatures = SignatureDictionary::standard();
    /// Snort fast alerts carry no year unless written with -y.
    int snort_year = 1970;
    /// Snort fast alerts carry no reporting component.
    ComponentId snort_sensor = ComponentId::cyber(1);
};

inline constexpr std::string_view kAlarmCsvHeader =
    "cid,time,src_ip,dst_ip,src_port,dst_port,sig_name,component";

/// Parses an alarm log. Malformed lines go to `rejects` with a reason; a
/// FormatError is raised only when data lines exist but none parse (or the
/// CSV header is wrong).
AlarmParseResult parse_alarm_log(std::istream& in, AlarmLogFormat format,
                                 const AlarmParseOptions& options = {});

std::string write_alarm_csv(std::span<const AlarmEvent> events);
std::string write_rejects_csv(std::span<const RejectedLine> rejects);

/// Parses "YYYY-MM-DD[T ]HH:MM:SS[.frac][Z|+HH:MM|-HH:MM]" into epoch seconds.
std::optional<double> parse_iso8601(std::string_view text);

// --- feature encoding --------------------------------------------------------

struct EncoderConfig {
    std::size_t hash_buckets = 8;
    double time_weight = 1.0;
    double port_weight = 0.25;
    double ip_weight = 1.0;
    double sig_weight = 1.0;
    double component_weight = 1.0;

    std::size_t dimension() const { return 3 + 4 * hash_buckets; }
};

using FeatureVector = std::vector<double>;

/// Layout: [time, src_port, dst_port, src_ip one-hot, dst_ip one-hot,
/// sig one-hot, component one-hot]; categorical fields are hashed into
/// `hash_buckets` slots. Time is scaled to [0, 1] over the batch span
/// (0 when the span is degenerate). Throws DegenerateInput on empty input.
std::vector<FeatureVector> encode_alarms(std::span<const AlarmEvent> events,
                                         const EncoderConfig& config = {});

// --- aggregation -------------------------------------------------------------

struct FcmResult;

/// Collapses, within each hard cluster, events sharing (sig_name, src_ip,
/// dst_ip, component) whose times lie within `merge_window` seconds of the
/// group representative. The representative keeps the earliest event's
/// fields and the summed count. Output is sorted by (time, cid).
std::vector<AlarmEvent> aggregate(std::span<const AlarmEvent> events,
                                  std::span<const std::size_t> clusters, double merge_window);
std::vector<AlarmEvent> aggregate(std::span<const AlarmEvent> events, const FcmResult& result,
                                  double merge_window);

}  // namespace cpsmine
