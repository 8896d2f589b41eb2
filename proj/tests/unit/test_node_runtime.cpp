#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "railmon/error.hpp"
#include "railmon/node_runtime.hpp"

using namespace railmon;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected railmon::Error");
    return ErrorCode::BadJson;
}

// Charge for one cycle computed from first principles.
double oracle_cycle_mah(const NodeConfig& c) {
    const auto toa = oracle::time_on_air(c.radio.spreading_factor, static_cast<double>(c.radio.bandwidth_hz),
                                         c.radio.coding_rate_denominator, c.radio.preamble_symbols,
                                         c.radio.explicit_header, c.radio.radio_crc_on, c.radio.low_data_rate_opt, 21)
                         .total_s;
    const double sleep_s = c.wake_period_s - c.active_window_s - toa;
    const double mas = c.currents.listen_ma * c.active_window_s + c.currents.tx_ma * toa +
                       (c.currents.sleep_ua + c.currents.sensor_ua) * 1e-3 * sleep_s;
    return mas / 3600.0;
}

}  // namespace

TEST_CASE("phase durations partition the wake period") {
    const NodeConfig cfg;
    double total = 0;
    for (auto p : {NodePhase::Init, NodePhase::Sample, NodePhase::Encode, NodePhase::Transmit, NodePhase::Sleep}) {
        CHECK(phase_duration_s(cfg, p) >= 0.0);
        if (p != NodePhase::Init) total += phase_duration_s(cfg, p);
    }
    CHECK(total == doctest::Approx(60.0).epsilon(1e-12));
    CHECK(phase_duration_s(cfg, NodePhase::Transmit) == doctest::Approx(0.329728).epsilon(1e-12));
}

TEST_CASE("energy ledger golden values") {
    const NodeConfig cfg;
    CHECK(phase_energy_mah(cfg, NodePhase::Transmit) == doctest::Approx(0.010990933333).epsilon(1e-9));
    CHECK(std::fabs(energy_per_cycle_mah(cfg) - 0.01156361277333333) < 1e-12);
    CHECK(std::fabs(energy_per_cycle_mah(cfg) - oracle_cycle_mah(cfg)) < 1e-12);
    CHECK(battery_life_days(cfg) == doctest::Approx(120.1085608895331).epsilon(1e-12));
    CHECK(average_current_ma(cfg) == doctest::Approx(energy_per_cycle_mah(cfg) * 60.0).epsilon(1e-12));

    NodeConfig slow = cfg;
    slow.wake_period_s = 600.0;
    CHECK(battery_life_days(slow) == doctest::Approx(934.42).epsilon(1e-4));
}

TEST_CASE("energy model agrees with oracle across configurations") {
    for (int sf = 7; sf <= 12; ++sf) {
        for (double period : {10.0, 60.0, 300.0, 3600.0}) {
            NodeConfig cfg;
            cfg.radio.spreading_factor = sf;
            cfg.wake_period_s = period;
            cfg.currents.tx_ma = 40.0 + sf;
            CHECK(std::fabs(energy_per_cycle_mah(cfg) - oracle_cycle_mah(cfg)) < 1e-9);
        }
    }
}

TEST_CASE("config validation") {
    NodeConfig cfg;
    cfg.node_id = 5;
    CHECK(code_of([&] { validate(cfg); }) == ErrorCode::InvalidNodeId);
    CHECK(code_of([&] { SensorNode{cfg}; }) == ErrorCode::InvalidNodeId);
    cfg = {};
    cfg.wake_period_s = 2.0;  // jitter alone fills the slot
    CHECK(code_of([&] { validate(cfg); }) == ErrorCode::InvalidParams);
    cfg = {};
    cfg.currents.tx_ma = -1;
    CHECK(code_of([&] { validate(cfg); }) == ErrorCode::InvalidParams);
    cfg = {};
    cfg.battery_mah = 0;
    CHECK(code_of([&] { validate(cfg); }) == ErrorCode::InvalidParams);
    cfg = {};
    cfg.radio.coding_rate_denominator = 9;
    CHECK(code_of([&] { validate(cfg); }) == ErrorCode::InvalidParams);
}

TEST_CASE("duty cycle order and per-cycle accounting") {
    NodeConfig cfg;
    cfg.node_id = 8;
    SensorNode node(cfg);
    CHECK(node.state().phase == NodePhase::Init);
    const StimulusSample s{0.0, 0.0, 1.0, 25.0, 50.0};

    CHECK_FALSE(node.step(s, 0.0));
    CHECK(node.state().phase == NodePhase::Sample);
    CHECK(node.state().consumed_mah == 0.0);

    double t = 0.0;
    for (int cycle = 1; cycle <= 5; ++cycle) {
        CHECK_FALSE(node.step(s, t));
        CHECK(node.state().phase == NodePhase::Encode);
        CHECK_FALSE(node.step(s, t));
        CHECK(node.state().phase == NodePhase::Transmit);
        const auto wire = node.step(s, t);
        REQUIRE(wire);
        CHECK(node.state().phase == NodePhase::Sleep);
        const auto f = decode_frame(*wire);
        CHECK(f.node_id == 8);
        CHECK(f.accel_z_mg == 1000);
        CHECK(f.temp_centi_c == doctest::Approx(2500).epsilon(0.005));
        CHECK(node.state().frames_sent == static_cast<std::uint64_t>(cycle));
        CHECK_FALSE(node.step(s, t + 1.0));
        CHECK(node.state().phase == NodePhase::Sample);
        CHECK(node.state().consumed_mah == doctest::Approx(cycle * energy_per_cycle_mah(cfg)).epsilon(1e-12));
        t += cfg.wake_period_s;
    }
    CHECK(node.state().last_frame->node_id == 8);
}

TEST_CASE("clock regression is rejected") {
    SensorNode node(NodeConfig{});
    node.step({}, 10.0);
    CHECK(code_of([&] { node.step({}, 9.0); }) == ErrorCode::ClockRegression);
    CHECK_NOTHROW(node.step({}, 10.0));
}

TEST_CASE("out-of-range stimulus saturates instead of failing") {
    SensorNode node(NodeConfig{});
    node.step({}, 0.0);
    const auto f = node.sample_sensors({10.0, -10.0, 0.0, 500.0, -20.0});
    CHECK(f.accel_x_mg == 2047);
    CHECK(f.accel_y_mg == -2048);
    CHECK(f.temp_centi_c <= 15000);
    CHECK(f.pressure_centi_kpa == 0);
    CHECK_NOTHROW(encode_frame(f));
}

TEST_CASE("phase names") {
    CHECK(phase_name(NodePhase::Init) == "Init");
    CHECK(phase_name(NodePhase::Transmit) == "Transmit");
    CHECK(phase_name(NodePhase::Sleep) == "Sleep");
}
