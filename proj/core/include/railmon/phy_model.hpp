#pragma once

// LoRa physical-layer arithmetic: symbol time, air bit rate, time on air,
// link budget, log-distance path loss and the reception decision.

#include <cstdint>

namespace railmon {

struct RadioParams {
    int spreading_factor = 12;
    std::int64_t bandwidth_hz = 500'000;
    int coding_rate_denominator = 5;  // CR = 4/denominator
    int preamble_symbols = 8;
    bool explicit_header = true;
    bool radio_crc_on = true;
    bool low_data_rate_opt = false;  // T_sym = 8.192 ms < 16 ms at SF12/BW500
    double tx_power_dbm = 22.0;
    double rx_sensitivity_dbm = -148.0;
    std::int64_t frequency_hz = 433'000'000;
    // Receive timeout (symbols). Recorded configuration only.
    int rx_timeout_symbols = 5;

    friend bool operator==(const RadioParams&, const RadioParams&) = default;
};

/// Free-space loss in dB at `distance_m` for a carrier of `frequency_hz`.
double free_space_loss_db(double frequency_hz, double distance_m);

struct PathLossModel {
    double reference_distance_m = 1.0;
    double reference_loss_db = free_space_loss_db(433e6, 1.0);
    double exponent = 2.8;
    double capture_threshold_db = 6.0;

    friend bool operator==(const PathLossModel&, const PathLossModel&) = default;
};

/// Throws Error{InvalidParams} describing the first violated field.
void validate(const RadioParams& p);
void validate(const PathLossModel& m);

double symbol_time_s(const RadioParams& p);
double air_bit_rate_bps(const RadioParams& p);

/// Payload symbol count, including the 8 fixed symbols.
std::int64_t payload_symbols(const RadioParams& p, std::int64_t payload_len_bytes);
double time_on_air_s(const RadioParams& p, std::int64_t payload_len_bytes);

double link_budget_db(const RadioParams& p);

/// Throws Error{DomainError} for distances shorter than the reference distance.
double path_loss_db(const PathLossModel& m, double distance_m);

struct LinkOutcome {
    bool received = false;
    double rssi_dbm = 0.0;
};

/// received iff rssi >= sensitivity (inclusive).
LinkOutcome receive_decision(const RadioParams& p, const PathLossModel& m, double distance_m);

}  // namespace railmon
