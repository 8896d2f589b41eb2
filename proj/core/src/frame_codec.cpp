#include "railmon/frame_codec.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "railmon/error.hpp"

namespace railmon {

namespace {

template <typename T>
void put_le(std::uint8_t* out, T value) {
    using U = std::make_unsigned_t<T>;
    auto bits = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out[i] = static_cast<std::uint8_t>(bits & 0xFFu);
        bits = static_cast<U>(bits >> 8);
    }
}

template <typename T>
T get_le(const std::uint8_t* in) {
    using U = std::make_unsigned_t<T>;
    U bits = 0;
    for (std::size_t i = sizeof(T); i-- > 0;) {
        bits = static_cast<U>((bits << 8) | in[i]);
    }
    return static_cast<T>(bits);
}

std::string format_centi(std::int64_t centi) {
    const char* sign = centi < 0 ? "-" : "";
    const std::uint64_t mag = centi < 0 ? static_cast<std::uint64_t>(-centi) : static_cast<std::uint64_t>(centi);
    return fmt::format("{}{}.{:02}", sign, mag / 100, mag % 100);
}

using nlohmann::json;

const json& require(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw Error(ErrorCode::BadJson, fmt::format("missing key '{}'", key));
    }
    return *it;
}

std::int64_t require_int(const json& obj, const char* key, std::int64_t lo, std::int64_t hi) {
    const json& v = require(obj, key);
    if (!v.is_number_integer()) {
        throw Error(ErrorCode::BadJson, fmt::format("key '{}' must be an integer", key));
    }
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > hi) {
        throw Error(ErrorCode::BadJson, fmt::format("key '{}' out of representable range", key));
    }
    return x;
}

std::int64_t require_centi(const json& obj, const char* key) {
    const json& v = require(obj, key);
    if (!v.is_number()) {
        throw Error(ErrorCode::BadJson, fmt::format("key '{}' must be a number", key));
    }
    const double scaled = v.get<double>() * 100.0;
    if (!std::isfinite(scaled) || std::fabs(scaled) > 1e9) {
        throw Error(ErrorCode::BadJson, fmt::format("key '{}' out of representable range", key));
    }
    return std::llround(scaled);
}

}  // namespace

void validate_frame(const TelemetryFrame& frame) {
    if (!is_valid_node_id(frame.node_id)) {
        throw Error(ErrorCode::InvalidNodeId, fmt::format("node id {} not in [{}, {}]", frame.node_id,
                                                          kMinNodeId, kMaxNodeId));
    }
    if (frame.temp_centi_c < kMinTempCentiC || frame.temp_centi_c > kMaxTempCentiC) {
        throw Error(ErrorCode::RangeError,
                    fmt::format("temperature {} centi-degC outside sensor range", frame.temp_centi_c));
    }
    if (frame.pressure_centi_kpa > kMaxPressureCentiKpa) {
        throw Error(ErrorCode::RangeError,
                    fmt::format("pressure {} centi-kPa outside sensor range", frame.pressure_centi_kpa));
    }
}

WireFrame encode_frame(const TelemetryFrame& frame) {
    validate_frame(frame);
    WireFrame out{};
    out[0] = kSyncByte0;
    out[1] = kSyncByte1;
    out[2] = frame.gateway_id;
    out[3] = frame.node_id;
    out[4] = frame.reserved;
    put_le(&out[5], frame.accel_x_mg);
    put_le(&out[9], frame.accel_y_mg);
    put_le(&out[13], frame.accel_z_mg);
    put_le(&out[17], frame.temp_centi_c);
    put_le(&out[19], frame.pressure_centi_kpa);
    return out;
}

TelemetryFrame decode_frame(std::span<const std::uint8_t> wire) {
    if (wire.size() != kFrameSize) {
        throw Error(ErrorCode::BadLength, fmt::format("expected {} octets, got {}", kFrameSize, wire.size()));
    }
    if (wire[0] != kSyncByte0 || wire[1] != kSyncByte1) {
        throw Error(ErrorCode::BadHeader, fmt::format("sync {:02X} {:02X}", wire[0], wire[1]));
    }
    TelemetryFrame f;
    f.gateway_id = wire[2];
    f.node_id = wire[3];
    f.reserved = wire[4];
    f.accel_x_mg = get_le<std::int32_t>(&wire[5]);
    f.accel_y_mg = get_le<std::int32_t>(&wire[9]);
    f.accel_z_mg = get_le<std::int32_t>(&wire[13]);
    f.temp_centi_c = get_le<std::int16_t>(&wire[17]);
    f.pressure_centi_kpa = get_le<std::uint16_t>(&wire[19]);
    validate_frame(f);
    return f;
}

std::string frame_to_json(const TelemetryFrame& frame, const RxMeta& meta) {
    validate_frame(frame);
    std::string ts = meta.rx_timestamp_ms ? fmt::format("{}", *meta.rx_timestamp_ms) : "null";
    std::string rssi =
        meta.rssi_dbm && std::isfinite(*meta.rssi_dbm) ? fmt::format("{:.1f}", *meta.rssi_dbm) : "null";
    return fmt::format(
        R"({{"gateway_id":{},"node_id":{},"ax_mg":{},"ay_mg":{},"az_mg":{},"temp_c":{},"pressure_kpa":{},"rx_timestamp_ms":{},"rssi_dbm":{}}})",
        frame.gateway_id, frame.node_id, frame.accel_x_mg, frame.accel_y_mg, frame.accel_z_mg,
        format_centi(frame.temp_centi_c), format_centi(frame.pressure_centi_kpa), ts, rssi);
}

ParsedFrameJson frame_from_json(std::string_view line) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::BadJson, e.what());
    }
    if (!obj.is_object()) {
        throw Error(ErrorCode::BadJson, "not a JSON object");
    }
    static constexpr const char* kKeys[] = {"gateway_id", "node_id",      "ax_mg",
                                            "ay_mg",      "az_mg",        "temp_c",
                                            "pressure_kpa", "rx_timestamp_ms", "rssi_dbm"};
    for (const auto& item : obj.items()) {
        bool known = item.key() == "topic";
        for (const char* k : kKeys) known = known || item.key() == k;
        if (!known) {
            throw Error(ErrorCode::BadJson, fmt::format("unexpected key '{}'", item.key()));
        }
    }

    constexpr auto i32min = std::numeric_limits<std::int32_t>::min();
    constexpr auto i32max = std::numeric_limits<std::int32_t>::max();

    ParsedFrameJson out;
    out.frame.gateway_id = static_cast<std::uint8_t>(require_int(obj, "gateway_id", 0, 255));
    out.frame.node_id = static_cast<std::uint8_t>(require_int(obj, "node_id", 0, 255));
    out.frame.accel_x_mg = static_cast<std::int32_t>(require_int(obj, "ax_mg", i32min, i32max));
    out.frame.accel_y_mg = static_cast<std::int32_t>(require_int(obj, "ay_mg", i32min, i32max));
    out.frame.accel_z_mg = static_cast<std::int32_t>(require_int(obj, "az_mg", i32min, i32max));

    const auto temp = require_centi(obj, "temp_c");
    const auto pres = require_centi(obj, "pressure_kpa");
    if (temp < kMinTempCentiC || temp > kMaxTempCentiC) {
        throw Error(ErrorCode::RangeError, fmt::format("temp_c {} outside sensor range", format_centi(temp)));
    }
    if (pres < 0 || pres > kMaxPressureCentiKpa) {
        throw Error(ErrorCode::RangeError,
                    fmt::format("pressure_kpa {} outside sensor range", format_centi(pres)));
    }
    out.frame.temp_centi_c = static_cast<std::int16_t>(temp);
    out.frame.pressure_centi_kpa = static_cast<std::uint16_t>(pres);

    const json& ts = require(obj, "rx_timestamp_ms");
    if (!ts.is_null()) {
        if (!ts.is_number_integer()) {
            throw Error(ErrorCode::BadJson, "key 'rx_timestamp_ms' must be an integer or null");
        }
        out.meta.rx_timestamp_ms = ts.get<std::int64_t>();
    }
    const json& rssi = require(obj, "rssi_dbm");
    if (!rssi.is_null()) {
        if (!rssi.is_number()) {
            throw Error(ErrorCode::BadJson, "key 'rssi_dbm' must be a number or null");
        }
        out.meta.rssi_dbm = rssi.get<double>();
    }
    if (auto it = obj.find("topic"); it != obj.end()) {
        if (!it->is_string()) {
            throw Error(ErrorCode::BadJson, "key 'topic' must be a string");
        }
        out.topic = it->get<std::string>();
    }

    validate_frame(out.frame);
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0F]);
    }
    return out;
}

std::vector<std::uint8_t> from_hex(std::string_view text) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    std::vector<std::uint8_t> out;
    int hi = -1;
    for (char c : text) {
        if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
        const int v = nibble(c);
        if (v < 0) {
            throw Error(ErrorCode::DomainError, fmt::format("invalid hex digit '{}'", c));
        }
        if (hi < 0) {
            hi = v;
        } else {
            out.push_back(static_cast<std::uint8_t>((hi << 4) | v));
            hi = -1;
        }
    }
    if (hi >= 0) {
        throw Error(ErrorCode::DomainError, "odd number of hex digits");
    }
    return out;
}

}  // namespace railmon
