#pragma once

// Cloud-side persistence of uplinked readings: an append-only NDJSON store
// with an in-memory time index, range queries and threshold alarms.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "railmon/error.hpp"

namespace railmon {

struct Reading {
    std::uint8_t node_id = 0;
    std::int64_t rx_timestamp_ms = 0;
    std::int32_t ax_mg = 0;
    std::int32_t ay_mg = 0;
    std::int32_t az_mg = 0;
    double temp_c = 0.0;
    double pressure_kpa = 0.0;
    std::optional<double> rssi_dbm;
    std::string line;  // canonical sink line, as persisted

    double accel_magnitude_mg() const;

    friend bool operator==(const Reading&, const Reading&) = default;
};

/// Parses one gateway sink line into a Reading. Throws Error on schema
/// violations (BadJson, InvalidNodeId, RangeError).
Reading parse_reading(std::string_view line);

struct LineRejection {
    std::size_t line_no = 0;  // 1-based within the batch
    ErrorCode reason = ErrorCode::BadJson;
    std::string detail;
};

struct IngestResult {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t duplicates = 0;
    std::vector<LineRejection> rejections;
};

/// Single writer, many readers. Each ingest batch is appended to the backing
/// file (if any) and then published to readers as a new snapshot.
class ReadingStore {
public:
    /// In-memory store.
    ReadingStore();
    /// File-backed store; existing lines are loaded and indexed. Throws
    /// Error{StoreUnavailable} if the file cannot be read or created.
    static ReadingStore open(const std::filesystem::path& path);

    ReadingStore(ReadingStore&&) noexcept;
    ReadingStore& operator=(ReadingStore&&) noexcept;
    ~ReadingStore();

    /// Blank lines are ignored. Idempotent on (node_id, rx_timestamp_ms).
    IngestResult ingest_lines(std::span<const std::string> lines);
    IngestResult ingest_text(std::string_view ndjson);

    /// Readings with rx_timestamp in [from, to], optionally for one node,
    /// ordered by (timestamp, node_id). Throws Error{BadRange} if from > to.
    std::vector<Reading> query(std::optional<std::uint8_t> node_id, std::int64_t t_from_ms,
                               std::int64_t t_to_ms) const;

    /// Every reading, ordered by (timestamp, node_id).
    std::vector<Reading> all() const;
    std::size_t size() const;

private:
    struct Snapshot;
    std::shared_ptr<const Snapshot> snapshot() const;

    std::optional<std::filesystem::path> path_;
    std::unique_ptr<std::mutex> writer_;
    std::unique_ptr<std::shared_mutex> publish_;
    std::shared_ptr<const Snapshot> current_;
};

enum class AlarmMetric { AccelMagnitudeMg, TempC, PressureKpa };
enum class Comparator { Greater, GreaterEqual, Less, LessEqual };

struct AlarmRule {
    std::string name;
    AlarmMetric metric = AlarmMetric::AccelMagnitudeMg;
    Comparator comparator = Comparator::Greater;
    double threshold = 0.0;
    std::optional<std::uint8_t> node_id;  // nullopt: all nodes
    bool enabled = true;
};

struct Alarm {
    std::size_t rule_index = 0;
    std::string rule_name;
    AlarmMetric metric = AlarmMetric::AccelMagnitudeMg;
    double value = 0.0;
    std::int64_t fired_at_ms = 0;
    Reading reading;
};

double metric_value(const Reading& r, AlarmMetric metric);
bool rule_violated(const AlarmRule& rule, const Reading& r);

/// JSON array of rule objects:
///   {"name", "metric": "accel_magnitude_mg"|"temp_c"|"pressure_kpa",
///    "comparator": ">"|">="|"<"|"<=", "threshold", "node_id"?, "enabled"?}
/// Throws Error{InvalidRule}.
std::vector<AlarmRule> parse_rules(std::string_view json_text);
std::vector<AlarmRule> load_rules(const std::filesystem::path& path);

/// One alarm per enabled (rule, violating reading), ordered by reading
/// (timestamp, node_id) and then by rule index.
std::vector<Alarm> evaluate_alarms(const ReadingStore& store, std::span<const AlarmRule> rules);

std::string readings_to_json(std::span<const Reading> readings);
std::string readings_to_csv(std::span<const Reading> readings);
std::string alarms_to_json(std::span<const Alarm> alarms);
std::string alarms_to_csv(std::span<const Alarm> alarms);
std::string ingest_result_to_json(const IngestResult& result);

}  // namespace railmon
