#pragma once

// Fixed-length telemetry frame exchanged between sensor node, gateway and uplink.
//
// Wire layout (21 octets, little-endian multi-byte fields, no checksum):
//
//   off  len  field
//    0    2   sync header A5 7E
//    2    1   gateway (remote) id, 0x10
//    3    1   node (local) id, 6..9
//    4    1   reserved
//    5    4   accel X, int32 milli-g
//    9    4   accel Y, int32 milli-g
//   13    4   accel Z, int32 milli-g
//   17    2   temperature, int16 centi-degC
//   19    2   pressure, uint16 centi-kPa

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace railmon {

inline constexpr std::uint8_t kSyncByte0 = 0xA5;
inline constexpr std::uint8_t kSyncByte1 = 0x7E;
inline constexpr std::uint8_t kGatewayId = 0x10;
inline constexpr std::uint8_t kMinNodeId = 6;
inline constexpr std::uint8_t kMaxNodeId = 9;
inline constexpr std::size_t kFrameSize = 21;

inline constexpr std::int16_t kMinTempCentiC = -5000;
inline constexpr std::int16_t kMaxTempCentiC = 15000;
inline constexpr std::uint16_t kMaxPressureCentiKpa = 10000;

struct TelemetryFrame {
    std::uint8_t gateway_id = kGatewayId;
    std::uint8_t node_id = kMinNodeId;
    std::uint8_t reserved = 0;
    std::int32_t accel_x_mg = 0;
    std::int32_t accel_y_mg = 0;
    std::int32_t accel_z_mg = 0;
    std::int16_t temp_centi_c = 0;
    std::uint16_t pressure_centi_kpa = 0;

    friend bool operator==(const TelemetryFrame&, const TelemetryFrame&) = default;
};

using WireFrame = std::array<std::uint8_t, kFrameSize>;

/// Receive-side metadata attached by the gateway. Either field may be absent
/// for offline replay.
struct RxMeta {
    std::optional<std::int64_t> rx_timestamp_ms;
    std::optional<double> rssi_dbm;

    friend bool operator==(const RxMeta&, const RxMeta&) = default;
};

constexpr bool is_valid_node_id(std::uint8_t id) noexcept {
    return id >= kMinNodeId && id <= kMaxNodeId;
}

/// Throws Error{InvalidNodeId} or Error{RangeError}.
void validate_frame(const TelemetryFrame& frame);

WireFrame encode_frame(const TelemetryFrame& frame);

/// Length is checked first, then the sync header, then field invariants.
TelemetryFrame decode_frame(std::span<const std::uint8_t> wire);

/// Single-line JSON with a fixed key order:
/// gateway_id, node_id, ax_mg, ay_mg, az_mg, temp_c, pressure_kpa,
/// rx_timestamp_ms, rssi_dbm. Decimals are fixed at 2 digits for
/// temp/pressure and 1 digit for rssi; absent meta fields are null.
std::string frame_to_json(const TelemetryFrame& frame, const RxMeta& meta);

struct ParsedFrameJson {
    TelemetryFrame frame;
    RxMeta meta;
    std::optional<std::string> topic;
};

/// Accepts frame_to_json output, optionally carrying a leading "topic" key
/// (gateway sink format). Throws Error{BadJson} on schema violations.
ParsedFrameJson frame_from_json(std::string_view line);

/// Uppercase hex, no separators.
std::string to_hex(std::span<const std::uint8_t> bytes);
/// Ignores ASCII whitespace; throws Error{DomainError} on odd length or a
/// non-hex digit.
std::vector<std::uint8_t> from_hex(std::string_view text);

}  // namespace railmon
