#include "railmon/node_runtime.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "railmon/error.hpp"

namespace railmon {

namespace {

constexpr double kSecondsPerHour = 3600.0;
constexpr double kSecondsPerDay = 86400.0;

double frame_toa_s(const NodeConfig& cfg) {
    return time_on_air_s(cfg.radio, static_cast<std::int64_t>(kFrameSize));
}

}  // namespace

std::string_view phase_name(NodePhase phase) noexcept {
    switch (phase) {
        case NodePhase::Init: return "Init";
        case NodePhase::Sample: return "Sample";
        case NodePhase::Encode: return "Encode";
        case NodePhase::Transmit: return "Transmit";
        case NodePhase::Sleep: return "Sleep";
    }
    return "?";
}

void validate(const NodeConfig& cfg) {
    if (!is_valid_node_id(cfg.node_id)) {
        throw Error(ErrorCode::InvalidNodeId, fmt::format("node id {} not in [{}, {}]", cfg.node_id, kMinNodeId,
                                                          kMaxNodeId));
    }
    validate(cfg.radio);
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidParams, what); };
    const auto& c = cfg.currents;
    for (double v : {c.tx_ma, c.listen_ma, c.sleep_ua, c.sensor_ua}) {
        if (!(v >= 0.0) || !std::isfinite(v)) fail("currents must be finite and non-negative");
    }
    if (!(cfg.battery_mah > 0.0) || !std::isfinite(cfg.battery_mah)) fail("battery_mah must be positive");
    if (!(cfg.jitter_s >= 0.0) || !std::isfinite(cfg.jitter_s)) fail("jitter_s must be non-negative");
    if (!(cfg.active_window_s >= 0.0) || !std::isfinite(cfg.active_window_s)) {
        fail("active_window_s must be non-negative");
    }
    const double busy = cfg.jitter_s + cfg.active_window_s + frame_toa_s(cfg);
    if (!(cfg.wake_period_s > busy) || !std::isfinite(cfg.wake_period_s)) {
        fail(fmt::format("wake_period_s {} must exceed jitter + active window + time on air ({} s)",
                         cfg.wake_period_s, busy));
    }
}

double phase_duration_s(const NodeConfig& cfg, NodePhase phase) {
    switch (phase) {
        case NodePhase::Init:
        case NodePhase::Encode: return 0.0;
        case NodePhase::Sample: return cfg.active_window_s;
        case NodePhase::Transmit: return frame_toa_s(cfg);
        case NodePhase::Sleep: return cfg.wake_period_s - cfg.active_window_s - frame_toa_s(cfg);
    }
    return 0.0;
}

double phase_energy_mah(const NodeConfig& cfg, NodePhase phase) {
    const auto& c = cfg.currents;
    const double t = phase_duration_s(cfg, phase);
    switch (phase) {
        case NodePhase::Init:
        case NodePhase::Encode: return 0.0;
        case NodePhase::Sample: return c.listen_ma * t / kSecondsPerHour;
        case NodePhase::Transmit: return c.tx_ma * t / kSecondsPerHour;
        case NodePhase::Sleep: return (c.sleep_ua + c.sensor_ua) / 1000.0 * t / kSecondsPerHour;
    }
    return 0.0;
}

double energy_per_cycle_mah(const NodeConfig& cfg) {
    return phase_energy_mah(cfg, NodePhase::Sample) + phase_energy_mah(cfg, NodePhase::Encode) +
           phase_energy_mah(cfg, NodePhase::Transmit) + phase_energy_mah(cfg, NodePhase::Sleep);
}

double average_current_ma(const NodeConfig& cfg) {
    return energy_per_cycle_mah(cfg) * kSecondsPerHour / cfg.wake_period_s;
}

double battery_life_days(const NodeConfig& cfg) {
    const double cycles_per_day = kSecondsPerDay / cfg.wake_period_s;
    return cfg.battery_mah / (energy_per_cycle_mah(cfg) * cycles_per_day);
}

SensorNode::SensorNode(NodeConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    pending_.node_id = cfg_.node_id;
}

TelemetryFrame SensorNode::sample_sensors(const StimulusSample& s) {
    TelemetryFrame f;
    f.gateway_id = kGatewayId;
    f.node_id = cfg_.node_id;

    accel_.set_stimulus_g(s.ax_g, s.ay_g, s.az_g);
    const RawAccel raw = accel_.read_xyz();
    const double scale = accel_.scale_mg_per_lsb();
    f.accel_x_mg = raw_to_mg(raw.x, scale);
    f.accel_y_mg = raw_to_mg(raw.y, scale);
    f.accel_z_mg = raw_to_mg(raw.z, scale);

    // Sensors saturate at their rated range.
    const double temp_in = std::clamp(s.temp_c, thermometer_.min_c, thermometer_.max_c);
    const double temp_v = adc_.code_to_volts(adc_.sample(thermometer_.voltage(temp_in)));
    const auto temp_centi = std::llround(thermometer_.temperature(temp_v) * 100.0);
    f.temp_centi_c = static_cast<std::int16_t>(std::clamp<long long>(temp_centi, kMinTempCentiC, kMaxTempCentiC));

    const double pres_in = std::clamp(s.pressure_kpa, 0.0, barometer_.full_scale_kpa);
    const double pres_v = adc_.code_to_volts(adc_.sample(barometer_.voltage(pres_in)));
    const auto pres_centi = std::llround(barometer_.kpa(pres_v) * 100.0);
    f.pressure_centi_kpa = static_cast<std::uint16_t>(std::clamp<long long>(pres_centi, 0, kMaxPressureCentiKpa));
    return f;
}

std::optional<WireFrame> SensorNode::step(const StimulusSample& stimulus, double now_s) {
    if (state_.last_now_s && now_s < *state_.last_now_s) {
        throw Error(ErrorCode::ClockRegression, fmt::format("now {} s precedes {} s", now_s, *state_.last_now_s));
    }
    state_.last_now_s = now_s;

    std::optional<WireFrame> emitted;
    const NodePhase current = state_.phase;
    switch (current) {
        case NodePhase::Init:
            accel_.run_init_sequence();
            if (accel_.read_register(adxl362::kDevIdAd) != adxl362::kDevIdAdValue) {
                throw Error(ErrorCode::UnknownRegister, "ADXL362 device id mismatch");
            }
            state_.phase = NodePhase::Sample;
            break;
        case NodePhase::Sample:
            pending_ = sample_sensors(stimulus);
            state_.phase = NodePhase::Encode;
            break;
        case NodePhase::Encode:
            pending_wire_ = encode_frame(pending_);
            state_.phase = NodePhase::Transmit;
            break;
        case NodePhase::Transmit:
            emitted = pending_wire_;
            state_.last_frame = pending_;
            ++state_.frames_sent;
            state_.phase = NodePhase::Sleep;
            break;
        case NodePhase::Sleep:
            state_.phase = NodePhase::Sample;
            break;
    }
    state_.consumed_mah += phase_energy_mah(cfg_, current);
    return emitted;
}

}  // namespace railmon
