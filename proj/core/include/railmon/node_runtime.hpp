#pragma once

// Sensor-node duty cycle: Init -> (Sample -> Encode -> Transmit -> Sleep)*,
// with a per-phase energy ledger.

#include <cstdint>
#include <optional>
#include <string_view>

#include "railmon/frame_codec.hpp"
#include "railmon/phy_model.hpp"
#include "railmon/sensor_models.hpp"
#include "railmon/stimulus.hpp"

namespace railmon {

struct NodeCurrents {
    double tx_ma = 120.0;
    double listen_ma = 15.0;
    double sleep_ua = 20.0;
    double sensor_ua = 2.0;

    friend bool operator==(const NodeCurrents&, const NodeCurrents&) = default;
};

struct NodeConfig {
    std::uint8_t node_id = kMinNodeId;
    double wake_period_s = 60.0;
    double jitter_s = 2.0;  // wake offset drawn uniformly from [0, jitter_s)
    double active_window_s = 0.05;  // sample + encode, at listen current
    RadioParams radio;
    NodeCurrents currents;
    double battery_mah = 2000.0;

    friend bool operator==(const NodeConfig&, const NodeConfig&) = default;
};

/// Throws Error{InvalidNodeId} or Error{InvalidParams}.
void validate(const NodeConfig& cfg);

enum class NodePhase { Init, Sample, Encode, Transmit, Sleep };

std::string_view phase_name(NodePhase phase) noexcept;

struct NodeState {
    NodePhase phase = NodePhase::Init;
    double consumed_mah = 0.0;
    std::uint64_t frames_sent = 0;
    std::optional<TelemetryFrame> last_frame;
    std::optional<double> last_now_s;
};

/// Time spent in `phase` during one cycle.
double phase_duration_s(const NodeConfig& cfg, NodePhase phase);
/// Charge drawn in `phase` during one cycle.
double phase_energy_mah(const NodeConfig& cfg, NodePhase phase);

/// Charge for one Sample -> Encode -> Transmit -> Sleep cycle.
double energy_per_cycle_mah(const NodeConfig& cfg);
double average_current_ma(const NodeConfig& cfg);
double battery_life_days(const NodeConfig& cfg);

/// One sensor node: configuration, sensor front-end and duty-cycle state.
class SensorNode {
public:
    explicit SensorNode(NodeConfig cfg);

    /// Executes the current phase and advances to the next one. Only the
    /// Transmit phase returns a frame. Throws Error{ClockRegression} when
    /// `now_s` is earlier than the previous call.
    std::optional<WireFrame> step(const StimulusSample& stimulus, double now_s);

    /// Reads all three sensors through their models into a frame. Throws
    /// Error{NotMeasuring} before the Init phase has run.
    TelemetryFrame sample_sensors(const StimulusSample& stimulus);

    const NodeConfig& config() const { return cfg_; }
    const NodeState& state() const { return state_; }

private:
    NodeConfig cfg_;
    NodeState state_;
    Adxl362Model accel_;
    Lmt85Model thermometer_;
    PressureSensorModel barometer_;
    AdcModel adc_;
    TelemetryFrame pending_;
    WireFrame pending_wire_{};
};

}  // namespace railmon
