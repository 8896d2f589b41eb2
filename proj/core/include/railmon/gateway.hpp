#pragma once

// Edge gateway: validate and decode frames from the star network, convert
// them to JSON uplink records, and hand them to a pluggable uplink sink.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "railmon/error.hpp"
#include "railmon/frame_codec.hpp"

namespace railmon {

struct GatewayConfig {
    std::uint8_t gateway_id = kGatewayId;
    std::set<std::uint8_t> accepted_node_ids{6, 7, 8, 9};
    std::uint32_t serial_baud = 115200;  // UART to the cellular modem; informational
};

struct UplinkRecord {
    std::string topic;
    std::string payload;  // frame_to_json
    std::int64_t enqueued_at_ms = 0;
    std::uint8_t node_id = 0;
    std::optional<std::int64_t> rx_timestamp_ms;

    /// NDJSON sink line: `{"topic":...,` followed by the payload's keys.
    std::string ndjson_line() const;
};

struct Rejection {
    ErrorCode reason;
    std::string detail;
    std::vector<std::uint8_t> raw;
    RxMeta meta;
};

using IngestOutcome = std::variant<UplinkRecord, Rejection>;

/// `rail/track/<node_id>/telemetry`
std::string telemetry_topic(std::uint8_t node_id);

/// Never throws for malformed input; failures are returned as Rejection.
IngestOutcome gateway_ingest(const GatewayConfig& cfg, std::span<const std::uint8_t> wire, const RxMeta& meta);

class UplinkSink {
public:
    virtual ~UplinkSink() = default;
    /// Must either deliver the whole record or throw Error{SinkUnavailable}.
    virtual void publish(const UplinkRecord& record) = 0;
};

/// Appends one NDJSON line per record.
class NdjsonFileSink final : public UplinkSink {
public:
    explicit NdjsonFileSink(std::filesystem::path path);
    void publish(const UplinkRecord& record) override;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

/// Collects lines in memory.
class MemorySink final : public UplinkSink {
public:
    void publish(const UplinkRecord& record) override { lines_.push_back(record.ndjson_line()); }
    const std::vector<std::string>& lines() const { return lines_; }

private:
    std::vector<std::string> lines_;
};

/// Adapts the sink contract to an MQTT client's publish(topic, payload).
/// The callback reports failure by returning false or throwing.
class MqttPublishSink final : public UplinkSink {
public:
    using PublishFn = std::function<bool(const std::string& topic, const std::string& payload)>;
    explicit MqttPublishSink(PublishFn fn) : publish_(std::move(fn)) {}
    void publish(const UplinkRecord& record) override;

private:
    PublishFn publish_;
};

/// Ordered, loss-free handoff between one ingest producer and one flush
/// consumer. Records are deduplicated by (node_id, rx_timestamp_ms) at
/// flush time.
class UplinkQueue {
public:
    void push(UplinkRecord record);

    /// Publishes queued records in arrival order and returns how many reached
    /// the sink. On sink failure the unpublished records stay queued and the
    /// Error{SinkUnavailable} propagates.
    std::size_t flush(UplinkSink& sink);

    std::size_t size() const;
    bool empty() const { return size() == 0; }
    std::size_t duplicates_dropped() const;

private:
    mutable std::mutex mu_;
    std::deque<UplinkRecord> queue_;
    std::set<std::pair<std::uint8_t, std::int64_t>> published_;
    std::size_t duplicates_ = 0;
};

class Gateway {
public:
    explicit Gateway(GatewayConfig cfg = {}) : cfg_(std::move(cfg)) {}

    /// Ingests one received frame; accepted frames are enqueued for uplink.
    const IngestOutcome& receive(std::span<const std::uint8_t> wire, const RxMeta& meta);

    std::size_t flush(UplinkSink& sink) { return queue_.flush(sink); }

    const GatewayConfig& config() const { return cfg_; }
    UplinkQueue& queue() { return queue_; }
    std::size_t accepted() const { return accepted_; }
    const std::vector<Rejection>& rejections() const { return rejections_; }
    std::size_t presented() const { return accepted_ + rejections_.size(); }

private:
    GatewayConfig cfg_;
    UplinkQueue queue_;
    std::size_t accepted_ = 0;
    std::vector<Rejection> rejections_;
    IngestOutcome last_;
};

}  // namespace railmon
