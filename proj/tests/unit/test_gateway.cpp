#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

#include <json.hpp>

#include "oracles.hpp"
#include "railmon/gateway.hpp"

using namespace railmon;

namespace {

WireFrame frame_for(std::uint8_t node, std::int32_t ax = 0) {
    TelemetryFrame f;
    f.node_id = node;
    f.accel_x_mg = ax;
    return encode_frame(f);
}

UplinkRecord record_for(std::uint8_t node, std::int64_t ts) {
    auto out = gateway_ingest(GatewayConfig{}, frame_for(node, static_cast<std::int32_t>(ts)), RxMeta{ts, -90.0});
    return std::get<UplinkRecord>(out);
}

class FlakySink final : public UplinkSink {
public:
    explicit FlakySink(std::uint64_t seed, double fail_rate) : rng_(seed), fail_(fail_rate) {}
    void publish(const UplinkRecord& r) override {
        if (std::bernoulli_distribution(fail_)(rng_)) {
            ++failures;
            throw Error(ErrorCode::SinkUnavailable, "link down");
        }
        delivered.push_back(r);
    }
    std::vector<UplinkRecord> delivered;
    std::size_t failures = 0;

private:
    std::mt19937_64 rng_;
    double fail_;
};

}  // namespace

TEST_CASE("topic naming") {
    CHECK(telemetry_topic(6) == "rail/track/6/telemetry");
    CHECK(telemetry_topic(9) == "rail/track/9/telemetry");
}

TEST_CASE("valid frame becomes an uplink record") {
    const auto out = gateway_ingest(GatewayConfig{}, frame_for(7, 123), RxMeta{1000, -80.0});
    REQUIRE(std::holds_alternative<UplinkRecord>(out));
    const auto& r = std::get<UplinkRecord>(out);
    CHECK(r.topic == "rail/track/7/telemetry");
    CHECK(r.node_id == 7);
    CHECK(r.payload == frame_to_json(decode_frame(frame_for(7, 123)), RxMeta{1000, -80.0}));
    const auto line = nlohmann::ordered_json::parse(r.ndjson_line());
    CHECK(line.begin().key() == "topic");
    CHECK(line["topic"] == "rail/track/7/telemetry");
    CHECK(line["ax_mg"] == 123);
    CHECK(line.size() == 10);
}

TEST_CASE("malformed frames are rejected without throwing") {
    GatewayConfig cfg;
    const std::vector<std::uint8_t> zeros(21, 0);
    const std::vector<std::uint8_t> short_frame(5, 0xA5);
    auto reason = [&](std::span<const std::uint8_t> w) {
        const auto out = gateway_ingest(cfg, w, {});
        REQUIRE(std::holds_alternative<Rejection>(out));
        return std::get<Rejection>(out).reason;
    };
    CHECK(reason(zeros) == ErrorCode::BadHeader);
    CHECK(reason(short_frame) == ErrorCode::BadLength);

    auto w = frame_for(6);
    w[3] = 0x05;
    CHECK(reason(w) == ErrorCode::InvalidNodeId);
    w = frame_for(6);
    w[2] = 0x11;
    CHECK(reason(w) == ErrorCode::ForeignGateway);
    w = frame_for(6);
    w[17] = 0xFF;
    w[18] = 0x7F;  // 327.67 degC
    CHECK(reason(w) == ErrorCode::RangeError);

    cfg.accepted_node_ids = {6, 7};
    CHECK(reason(frame_for(8)) == ErrorCode::InvalidNodeId);
}

TEST_CASE("random garbage never escapes as an exception") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> len(0, 40), octet(0, 255);
    Gateway gw;
    for (int i = 0; i < 5000; ++i) {
        std::vector<std::uint8_t> bytes(static_cast<std::size_t>(len(rng)));
        for (auto& b : bytes) b = static_cast<std::uint8_t>(octet(rng));
        if (i % 3 == 0 && bytes.size() >= 2) {
            bytes[0] = 0xA5;
            bytes[1] = 0x7E;
        }
        CHECK_NOTHROW(gw.receive(bytes, RxMeta{i, -100.0}));
    }
    CHECK(gw.presented() == 5000);
}

TEST_CASE("gateway accounting") {
    Gateway gw;
    gw.receive(frame_for(6), RxMeta{1, -80});
    gw.receive(frame_for(9), RxMeta{2, -80});
    const std::vector<std::uint8_t> junk(21, 0);
    gw.receive(junk, RxMeta{3, -80});
    CHECK(gw.accepted() == 2);
    CHECK(gw.rejections().size() == 1);
    CHECK(gw.rejections()[0].raw == junk);
    CHECK(gw.presented() == 3);
    MemorySink sink;
    CHECK(gw.flush(sink) == 2);
    REQUIRE(sink.lines().size() == 2);
    CHECK(sink.lines()[0].find("\"node_id\":6") != std::string::npos);
    CHECK(sink.lines()[1].find("\"node_id\":9") != std::string::npos);
}

TEST_CASE("flaky sink: every record delivered exactly once, in order") {
    UplinkQueue q;
    for (int i = 0; i < 1000; ++i) q.push(record_for(static_cast<std::uint8_t>(6 + i % 4), i));
    FlakySink sink(99, 0.3);
    std::size_t total = 0;
    int attempts = 0;
    while (!q.empty()) {
        ++attempts;
        try {
            total += q.flush(sink);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SinkUnavailable);
        }
        REQUIRE(attempts < 100000);
    }
    CHECK(sink.failures > 0);
    CHECK(total <= 1000);
    REQUIRE(sink.delivered.size() == 1000);
    for (int i = 0; i < 1000; ++i) CHECK(sink.delivered[static_cast<std::size_t>(i)].rx_timestamp_ms == i);
}

TEST_CASE("duplicate (node, timestamp) records are dropped") {
    UplinkQueue q;
    q.push(record_for(6, 10));
    q.push(record_for(6, 10));
    q.push(record_for(7, 10));
    MemorySink sink;
    CHECK(q.flush(sink) == 2);
    q.push(record_for(6, 10));
    CHECK(q.flush(sink) == 0);
    CHECK(q.duplicates_dropped() == 2);
    CHECK(sink.lines().size() == 2);
}

TEST_CASE("concurrent producer and flushing consumer lose nothing") {
    UplinkQueue q;
    MemorySink sink;
    std::atomic<bool> done{false};
    constexpr int kCount = 20000;
    std::thread producer([&] {
        for (int i = 0; i < kCount; ++i) q.push(record_for(static_cast<std::uint8_t>(6 + i % 4), i));
        done = true;
    });
    std::size_t flushed = 0;
    while (!done || !q.empty()) flushed += q.flush(sink);
    producer.join();
    flushed += q.flush(sink);
    CHECK(flushed == kCount);
    REQUIRE(sink.lines().size() == kCount);
    for (int i = 0; i < kCount; i += 997) {
        const auto j = nlohmann::json::parse(sink.lines()[static_cast<std::size_t>(i)]);
        CHECK(j["rx_timestamp_ms"] == i);
    }
}

TEST_CASE("MQTT adapter") {
    std::vector<std::pair<std::string, std::string>> published;
    bool up = false;
    MqttPublishSink sink([&](const std::string& t, const std::string& p) {
        if (!up) return false;
        published.emplace_back(t, p);
        return true;
    });
    UplinkQueue q;
    q.push(record_for(8, 5));
    CHECK_THROWS_AS(q.flush(sink), Error);
    CHECK(q.size() == 1);
    up = true;
    CHECK(q.flush(sink) == 1);
    REQUIRE(published.size() == 1);
    CHECK(published[0].first == "rail/track/8/telemetry");
    CHECK(nlohmann::json::parse(published[0].second)["node_id"] == 8);

    MqttPublishSink throwing([](const std::string&, const std::string&) -> bool {
        throw std::runtime_error("broker gone");
    });
    try {
        throwing.publish(record_for(6, 1));
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SinkUnavailable);
    }
}

TEST_CASE("NDJSON file sink appends lines") {
    const auto dir = oracle::temp_dir("sink");
    const auto path = dir / "uplink.ndjson";
    {
        NdjsonFileSink sink(path);
        sink.publish(record_for(6, 1));
        sink.publish(record_for(7, 2));
    }
    {
        NdjsonFileSink sink(path);
        sink.publish(record_for(8, 3));
    }
    const auto text = oracle::read_file(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.rfind(record_for(8, 3).ndjson_line() + "\n") == text.size() - record_for(8, 3).ndjson_line().size() - 1);
    CHECK_THROWS_AS(NdjsonFileSink(dir / "missing" / "x.ndjson"), Error);
    std::filesystem::remove_all(dir);
}
