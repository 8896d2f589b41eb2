#pragma once

// Deterministic discrete-event simulation of the star network: sensor nodes
// transmitting to one gateway over a shared LoRa channel with capture-effect
// collision resolution.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "railmon/node_runtime.hpp"
#include "railmon/phy_model.hpp"
#include "railmon/stimulus.hpp"

namespace railmon {

struct NodeSpec {
    NodeConfig config;  // radio is overridden by Scenario::radio
    double distance_m = 100.0;
    double start_offset_s = 0.0;
    std::string stimulus_csv;  // informational once `stimulus` is loaded
    StimulusTrace stimulus;
};

struct Scenario {
    double duration_s = 600.0;
    std::optional<std::uint64_t> seed;
    RadioParams radio;
    PathLossModel path_loss;
    std::vector<NodeSpec> nodes;
};

/// Throws Error{ScenarioInvalid} listing every offending field.
void validate(const Scenario& s);

enum class EventKind { NodeWake, TxStart, TxEnd, RxDeliver, RxCollision };

std::string_view event_kind_name(EventKind kind) noexcept;

struct SimEvent {
    double time_s = 0.0;
    EventKind kind = EventKind::NodeWake;
    std::uint8_t node_id = 0;
    std::uint64_t cycle = 0;
};

/// Total order used by the event queue: (time, node_id, kind, cycle).
bool event_before(const SimEvent& a, const SimEvent& b) noexcept;

struct Transmission {
    std::uint8_t node_id = 0;
    double start_s = 0.0;
    double end_s = 0.0;
    double rssi_dbm = 0.0;
};

/// True iff the open intervals (start, end) intersect.
bool overlaps(const Transmission& a, const Transmission& b) noexcept;

/// Per-transmission verdict: delivered iff its RSSI exceeds that of every
/// temporally overlapping transmission by at least `capture_threshold_db`.
std::vector<bool> collision_resolve(std::span<const Transmission> txs, double capture_threshold_db);

struct NodeReport {
    std::uint8_t node_id = 0;
    double distance_m = 0.0;
    double rssi_dbm = 0.0;
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t collided = 0;
    std::uint64_t out_of_range = 0;
    double energy_mah = 0.0;
};

struct Delivery {
    double time_s = 0.0;
    std::uint8_t node_id = 0;
    std::int64_t rx_timestamp_ms = 0;
    double rssi_dbm = 0.0;
};

struct SimReport {
    std::uint64_t seed = 0;
    double duration_s = 0.0;
    std::vector<NodeReport> nodes;  // ascending node_id
    double delivery_ratio = 0.0;
    std::vector<Delivery> timeline;
    std::vector<std::string> uplink_lines;  // gateway NDJSON, arrival order
    std::vector<SimEvent> events;          // filled when requested
};

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    bool record_events = false;
};

/// Throws Error{ScenarioInvalid} (including a missing seed).
SimReport run_scenario(const Scenario& s, const RunOptions& opts = {});

struct RangeRow {
    double distance_m = 0.0;
    double rssi_dbm = 0.0;
    double delivery_ratio = 0.0;
};

struct RangeSweep {
    std::vector<RangeRow> rows;
    /// Largest swept distance with delivery ratio 1.0.
    std::optional<double> max_full_delivery_m;
};

/// One run per distance of a single-node scenario template.
RangeSweep range_sweep(const Scenario& single_node, std::span<const double> distances,
                       const RunOptions& opts = {});

}  // namespace railmon
