#include "railmon/gateway.hpp"

#include <fmt/format.h>

namespace railmon {

std::string telemetry_topic(std::uint8_t node_id) {
    return fmt::format("rail/track/{}/telemetry", node_id);
}

std::string UplinkRecord::ndjson_line() const {
    // payload always starts with '{"gateway_id"'
    return fmt::format(R"({{"topic":"{}",{})", topic, std::string_view(payload).substr(1));
}

IngestOutcome gateway_ingest(const GatewayConfig& cfg, std::span<const std::uint8_t> wire, const RxMeta& meta) {
    auto reject = [&](ErrorCode code, std::string detail) {
        return Rejection{code, std::move(detail), std::vector<std::uint8_t>(wire.begin(), wire.end()), meta};
    };
    TelemetryFrame frame;
    try {
        frame = decode_frame(wire);
    } catch (const Error& e) {
        return reject(e.code(), e.what());
    }
    if (frame.gateway_id != cfg.gateway_id) {
        return reject(ErrorCode::ForeignGateway,
                      fmt::format("frame addressed to 0x{:02X}, gateway is 0x{:02X}", frame.gateway_id, cfg.gateway_id));
    }
    if (!cfg.accepted_node_ids.contains(frame.node_id)) {
        return reject(ErrorCode::InvalidNodeId, fmt::format("node {} not accepted by this gateway", frame.node_id));
    }
    UplinkRecord rec;
    rec.topic = telemetry_topic(frame.node_id);
    rec.payload = frame_to_json(frame, meta);
    rec.enqueued_at_ms = meta.rx_timestamp_ms.value_or(0);
    rec.node_id = frame.node_id;
    rec.rx_timestamp_ms = meta.rx_timestamp_ms;
    return rec;
}

NdjsonFileSink::NdjsonFileSink(std::filesystem::path path) : path_(std::move(path)) {
    out_.open(path_, std::ios::out | std::ios::app | std::ios::binary);
    if (!out_) {
        throw Error(ErrorCode::SinkUnavailable, fmt::format("cannot open '{}'", path_.string()));
    }
}

void NdjsonFileSink::publish(const UplinkRecord& record) {
    const std::string line = record.ndjson_line() + '\n';
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    out_.flush();
    if (!out_) {
        out_.clear();
        throw Error(ErrorCode::SinkUnavailable, fmt::format("write to '{}' failed", path_.string()));
    }
}

void MqttPublishSink::publish(const UplinkRecord& record) {
    bool ok = false;
    try {
        ok = publish_(record.topic, record.payload);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::SinkUnavailable, e.what());
    }
    if (!ok) {
        throw Error(ErrorCode::SinkUnavailable, fmt::format("publish to '{}' failed", record.topic));
    }
}

void UplinkQueue::push(UplinkRecord record) {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(record));
}

std::size_t UplinkQueue::flush(UplinkSink& sink) {
    std::size_t published = 0;
    while (true) {
        UplinkRecord front;
        {
            std::lock_guard lock(mu_);
            if (queue_.empty()) break;
            front = queue_.front();
            if (front.rx_timestamp_ms && published_.contains({front.node_id, *front.rx_timestamp_ms})) {
                queue_.pop_front();
                ++duplicates_;
                continue;
            }
        }
        sink.publish(front);  // throws with the record still queued
        std::lock_guard lock(mu_);
        if (front.rx_timestamp_ms) published_.insert({front.node_id, *front.rx_timestamp_ms});
        queue_.pop_front();
        ++published;
    }
    return published;
}

std::size_t UplinkQueue::size() const {
    std::lock_guard lock(mu_);
    return queue_.size();
}

std::size_t UplinkQueue::duplicates_dropped() const {
    std::lock_guard lock(mu_);
    return duplicates_;
}

const IngestOutcome& Gateway::receive(std::span<const std::uint8_t> wire, const RxMeta& meta) {
    last_ = gateway_ingest(cfg_, wire, meta);
    if (const auto* rec = std::get_if<UplinkRecord>(&last_)) {
        ++accepted_;
        queue_.push(*rec);
    } else {
        rejections_.push_back(std::get<Rejection>(last_));
    }
    return last_;
}

}  // namespace railmon
