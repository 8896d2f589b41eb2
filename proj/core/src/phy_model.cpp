#include "railmon/phy_model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "railmon/error.hpp"

namespace railmon {

double free_space_loss_db(double frequency_hz, double distance_m) {
    return 20.0 * std::log10(distance_m) + 20.0 * std::log10(frequency_hz) - 147.55;
}

void validate(const RadioParams& p) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidParams, what); };
    if (p.spreading_factor < 6 || p.spreading_factor > 12) {
        fail(fmt::format("spreading_factor {} not in [6, 12]", p.spreading_factor));
    }
    if (p.bandwidth_hz <= 0) fail(fmt::format("bandwidth_hz {} must be positive", p.bandwidth_hz));
    if (p.coding_rate_denominator < 5 || p.coding_rate_denominator > 8) {
        fail(fmt::format("coding_rate_denominator {} not in [5, 8]", p.coding_rate_denominator));
    }
    if (p.preamble_symbols <= 0) fail(fmt::format("preamble_symbols {} must be positive", p.preamble_symbols));
    if (p.frequency_hz <= 0) fail(fmt::format("frequency_hz {} must be positive", p.frequency_hz));
    if (!std::isfinite(p.tx_power_dbm)) fail("tx_power_dbm must be finite");
    if (!std::isfinite(p.rx_sensitivity_dbm)) fail("rx_sensitivity_dbm must be finite");
}

void validate(const PathLossModel& m) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidParams, what); };
    if (!(m.reference_distance_m > 0.0) || !std::isfinite(m.reference_distance_m)) {
        fail("reference_distance_m must be positive");
    }
    if (!(m.reference_loss_db >= 0.0) || !std::isfinite(m.reference_loss_db)) {
        fail("reference_loss_db must be >= 0");
    }
    if (!(m.exponent > 0.0) || !std::isfinite(m.exponent)) fail("exponent must be > 0");
    if (!std::isfinite(m.capture_threshold_db)) fail("capture_threshold_db must be finite");
}

double symbol_time_s(const RadioParams& p) {
    validate(p);
    return std::ldexp(1.0, p.spreading_factor) / static_cast<double>(p.bandwidth_hz);
}

double air_bit_rate_bps(const RadioParams& p) {
    validate(p);
    const double symbols_per_s = static_cast<double>(p.bandwidth_hz) / std::ldexp(1.0, p.spreading_factor);
    return p.spreading_factor * symbols_per_s * (4.0 / p.coding_rate_denominator);
}

std::int64_t payload_symbols(const RadioParams& p, std::int64_t payload_len_bytes) {
    validate(p);
    if (payload_len_bytes < 0) {
        throw Error(ErrorCode::InvalidParams, fmt::format("payload length {} is negative", payload_len_bytes));
    }
    const std::int64_t de = p.low_data_rate_opt ? 1 : 0;
    const std::int64_t ih = p.explicit_header ? 0 : 1;
    const std::int64_t crc = p.radio_crc_on ? 1 : 0;
    const std::int64_t sf = p.spreading_factor;
    const std::int64_t denom = 4 * (sf - 2 * de);
    if (denom <= 0) {
        throw Error(ErrorCode::DegenerateParams, "SF - 2*DE must be positive");
    }
    const std::int64_t numer = 8 * payload_len_bytes - 4 * sf + 28 + 16 * crc - 20 * ih;
    // Integer ceiling for a possibly negative numerator over a positive denominator.
    const std::int64_t blocks = numer >= 0 ? (numer + denom - 1) / denom : -((-numer) / denom);
    return 8 + std::max<std::int64_t>(blocks * p.coding_rate_denominator, 0);
}

double time_on_air_s(const RadioParams& p, std::int64_t payload_len_bytes) {
    const auto n_payload = payload_symbols(p, payload_len_bytes);
    const double t_sym = symbol_time_s(p);
    return (p.preamble_symbols + 4.25 + static_cast<double>(n_payload)) * t_sym;
}

double link_budget_db(const RadioParams& p) {
    return p.tx_power_dbm - p.rx_sensitivity_dbm;
}

double path_loss_db(const PathLossModel& m, double distance_m) {
    validate(m);
    if (!(distance_m >= m.reference_distance_m) || !std::isfinite(distance_m)) {
        throw Error(ErrorCode::DomainError,
                    fmt::format("distance {} m below reference distance {} m", distance_m, m.reference_distance_m));
    }
    return m.reference_loss_db + 10.0 * m.exponent * std::log10(distance_m / m.reference_distance_m);
}

LinkOutcome receive_decision(const RadioParams& p, const PathLossModel& m, double distance_m) {
    validate(p);
    const double rssi = p.tx_power_dbm - path_loss_db(m, distance_m);
    return {rssi >= p.rx_sensitivity_dbm, rssi};
}

}  // namespace railmon
