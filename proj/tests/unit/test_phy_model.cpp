#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "railmon/error.hpp"
#include "railmon/phy_model.hpp"

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

RadioParams sf7_bw125() {
    RadioParams p;
    p.spreading_factor = 7;
    p.bandwidth_hz = 125'000;
    return p;
}

}  // namespace

TEST_CASE("symbol time and air bit rate") {
    const RadioParams p;
    CHECK(symbol_time_s(p) == doctest::Approx(0.008192).epsilon(1e-12));
    CHECK(air_bit_rate_bps(p) == doctest::Approx(1171.875).epsilon(1e-12));
    CHECK(std::fabs(air_bit_rate_bps(p) - 1170.0) / 1170.0 <= 0.005);

    const auto q = sf7_bw125();
    CHECK(symbol_time_s(q) == doctest::Approx(0.001024).epsilon(1e-12));
    CHECK(air_bit_rate_bps(q) == doctest::Approx(5468.75).epsilon(1e-12));
}

TEST_CASE("link budget") {
    const RadioParams p;
    CHECK(link_budget_db(p) == 170.0);
}

TEST_CASE("time on air for the telemetry frame") {
    const RadioParams p;
    CHECK(payload_symbols(p, 21) == 28);
    CHECK(time_on_air_s(p, 21) == doctest::Approx(0.329728).epsilon(1e-12));
    const auto o = oracle::time_on_air(12, 500e3, 5, 8, true, true, false, 21);
    CHECK(std::fabs(time_on_air_s(p, 21) - o.total_s) < 1e-9);
}

TEST_CASE("empty payload, implicit header, no crc") {
    RadioParams p;
    p.explicit_header = false;
    p.radio_crc_on = false;
    CHECK(payload_symbols(p, 0) == 8);
    CHECK(time_on_air_s(p, 0) == doctest::Approx(0.165888).epsilon(1e-12));
}

TEST_CASE("time on air agrees with the oracle across the parameter grid") {
    for (int sf = 7; sf <= 12; ++sf) {
        for (std::int64_t bw : {125'000, 250'000, 500'000}) {
            for (int cr = 5; cr <= 8; ++cr) {
                for (bool ldro : {false, true}) {
                    RadioParams p;
                    p.spreading_factor = sf;
                    p.bandwidth_hz = bw;
                    p.coding_rate_denominator = cr;
                    p.low_data_rate_opt = ldro;
                    double prev = 0.0;
                    for (int pl = 0; pl <= 64; ++pl) {
                        const auto o = oracle::time_on_air(sf, static_cast<double>(bw), cr, 8, true, true, ldro, pl);
                        const double t = time_on_air_s(p, pl);
                        REQUIRE(std::fabs(t - o.total_s) < 1e-9);
                        REQUIRE(payload_symbols(p, pl) == static_cast<std::int64_t>(o.payload_symbols));
                        REQUIRE(t >= prev);
                        prev = t;
                    }
                }
            }
        }
    }
}

TEST_CASE("time on air decreases with bandwidth, increases with spreading factor") {
    for (int pl = 0; pl <= 64; pl += 8) {
        for (int sf = 7; sf <= 12; ++sf) {
            RadioParams a;
            a.spreading_factor = sf;
            a.bandwidth_hz = 125'000;
            RadioParams b = a;
            b.bandwidth_hz = 250'000;
            RadioParams c = a;
            c.bandwidth_hz = 500'000;
            CHECK(time_on_air_s(a, pl) > time_on_air_s(b, pl));
            CHECK(time_on_air_s(b, pl) > time_on_air_s(c, pl));
            if (sf < 12) {
                RadioParams d = a;
                d.spreading_factor = sf + 1;
                CHECK(time_on_air_s(d, pl) > time_on_air_s(a, pl));
            }
        }
    }
}

TEST_CASE("parameter validation") {
    RadioParams p;
    p.coding_rate_denominator = 4;
    CHECK(code_of([&] { validate(p); }) == ErrorCode::InvalidParams);
    CHECK(code_of([&] { time_on_air_s(p, 21); }) == ErrorCode::InvalidParams);
    p = {};
    p.spreading_factor = 5;
    CHECK(code_of([&] { validate(p); }) == ErrorCode::InvalidParams);
    p.spreading_factor = 13;
    CHECK(code_of([&] { validate(p); }) == ErrorCode::InvalidParams);
    p = {};
    p.bandwidth_hz = 0;
    CHECK(code_of([&] { validate(p); }) == ErrorCode::InvalidParams);
    CHECK_NOTHROW(validate(RadioParams{}));
    CHECK_NOTHROW(validate(PathLossModel{}));

    PathLossModel m;
    m.exponent = 0.0;
    CHECK(code_of([&] { validate(m); }) == ErrorCode::InvalidParams);
    m = {};
    m.reference_distance_m = 0.0;
    CHECK(code_of([&] { validate(m); }) == ErrorCode::InvalidParams);
}

TEST_CASE("reference free-space loss") {
    CHECK(free_space_loss_db(433e6, 1.0) == doctest::Approx(25.1797579270673).epsilon(1e-12));
    CHECK(PathLossModel{}.reference_loss_db == doctest::Approx(oracle::fspl_1m(433e6)).epsilon(1e-12));
}

TEST_CASE("log-distance path loss and reception") {
    const RadioParams p;
    const PathLossModel m;
    CHECK(path_loss_db(m, 1.0) == doctest::Approx(m.reference_loss_db));
    CHECK(path_loss_db(m, 500.0) == doctest::Approx(oracle::log_distance_loss(m.reference_loss_db, 2.8, 500.0)));
    CHECK(path_loss_db(m, 500.0) == doctest::Approx(100.7509).epsilon(1e-6));
    CHECK(path_loss_db(m, 5000.0) == doctest::Approx(128.7509).epsilon(1e-6));

    const auto near = receive_decision(p, m, 500.0);
    CHECK(near.received);
    CHECK(near.rssi_dbm == doctest::Approx(-78.7509).epsilon(1e-6));
    const auto far = receive_decision(p, m, 5000.0);
    CHECK(far.received);
    CHECK(far.rssi_dbm == doctest::Approx(-106.7509).epsilon(1e-6));

    CHECK(code_of([&] { path_loss_db(m, 0.5); }) == ErrorCode::DomainError);
}

TEST_CASE("harsher propagation") {
    const RadioParams p;
    PathLossModel m;
    m.exponent = 4.0;
    const auto lost = receive_decision(p, m, 6000.0);
    CHECK_FALSE(lost.received);
    CHECK(lost.rssi_dbm == doctest::Approx(-154.306).epsilon(1e-5));

    m.exponent = 3.5;
    const auto kept = receive_decision(p, m, 6000.0);
    CHECK(kept.received);
    CHECK(kept.rssi_dbm == doctest::Approx(-135.415).epsilon(1e-5));
}

TEST_CASE("rssi is monotone in distance and the sensitivity edge is inclusive") {
    const RadioParams p;
    PathLossModel m;
    m.exponent = 4.0;
    double prev = 1e9;
    for (double d = 1.0; d < 20000.0; d *= 1.1) {
        const auto o = receive_decision(p, m, d);
        CHECK(o.rssi_dbm < prev);
        prev = o.rssi_dbm;
    }
    // distance where rssi == sensitivity exactly
    const double edge = std::pow(10.0, (link_budget_db(p) - m.reference_loss_db) / (10.0 * m.exponent));
    CHECK(edge == doctest::Approx(4173.55).epsilon(1e-5));
    CHECK(receive_decision(p, m, edge * (1 - 1e-9)).received);
    CHECK_FALSE(receive_decision(p, m, edge * (1 + 1e-9)).received);

    RadioParams exact = p;
    exact.rx_sensitivity_dbm = receive_decision(p, m, 1000.0).rssi_dbm;
    CHECK(receive_decision(exact, m, 1000.0).received);
}
