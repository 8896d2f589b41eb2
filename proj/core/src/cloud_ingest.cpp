#include "railmon/cloud_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "railmon/frame_codec.hpp"
#include "railmon/gateway.hpp"

namespace railmon {

struct ReadingStore::Snapshot {
    std::vector<Reading> by_time;  // sorted by (timestamp, node_id)
    std::set<std::pair<std::uint8_t, std::int64_t>> keys;
    std::map<std::uint8_t, std::int64_t> latest;
};

namespace {

bool time_order(const Reading& a, const Reading& b) {
    return std::tie(a.rx_timestamp_ms, a.node_id) < std::tie(b.rx_timestamp_ms, b.node_id);
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        lines.emplace_back(text.substr(0, nl));
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    return lines;
}

bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

double Reading::accel_magnitude_mg() const {
    const double x = ax_mg, y = ay_mg, z = az_mg;
    return std::sqrt(x * x + y * y + z * z);
}

Reading parse_reading(std::string_view line) {
    const ParsedFrameJson p = frame_from_json(line);
    if (!p.meta.rx_timestamp_ms) {
        throw Error(ErrorCode::BadJson, "rx_timestamp_ms is null");
    }
    if (p.topic && *p.topic != telemetry_topic(p.frame.node_id)) {
        throw Error(ErrorCode::BadJson, fmt::format("topic '{}' does not match node {}", *p.topic, p.frame.node_id));
    }
    Reading r;
    r.node_id = p.frame.node_id;
    r.rx_timestamp_ms = *p.meta.rx_timestamp_ms;
    r.ax_mg = p.frame.accel_x_mg;
    r.ay_mg = p.frame.accel_y_mg;
    r.az_mg = p.frame.accel_z_mg;
    r.temp_c = p.frame.temp_centi_c / 100.0;
    r.pressure_kpa = p.frame.pressure_centi_kpa / 100.0;
    r.rssi_dbm = p.meta.rssi_dbm;
    UplinkRecord canonical;
    canonical.topic = telemetry_topic(p.frame.node_id);
    canonical.payload = frame_to_json(p.frame, p.meta);
    r.line = canonical.ndjson_line();
    return r;
}

ReadingStore::ReadingStore()
    : writer_(std::make_unique<std::mutex>()),
      publish_(std::make_unique<std::shared_mutex>()),
      current_(std::make_shared<Snapshot>()) {}

ReadingStore::ReadingStore(ReadingStore&&) noexcept = default;
ReadingStore& ReadingStore::operator=(ReadingStore&&) noexcept = default;
ReadingStore::~ReadingStore() = default;

ReadingStore ReadingStore::open(const std::filesystem::path& path) {
    ReadingStore store;
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw Error(ErrorCode::StoreUnavailable, fmt::format("cannot read '{}'", path.string()));
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        const auto result = store.ingest_text(ss.str());
        if (result.rejected > 0) {
            const auto& first = result.rejections.front();
            throw Error(ErrorCode::StoreUnavailable, fmt::format("'{}' line {}: {}", path.string(), first.line_no,
                                                                 first.detail));
        }
    } else {
        std::ofstream create(path, std::ios::app);
        if (!create) {
            throw Error(ErrorCode::StoreUnavailable, fmt::format("cannot create '{}'", path.string()));
        }
    }
    store.path_ = path;
    return store;
}

std::shared_ptr<const ReadingStore::Snapshot> ReadingStore::snapshot() const {
    std::shared_lock lock(*publish_);
    return current_;
}

IngestResult ReadingStore::ingest_text(std::string_view ndjson) {
    const auto lines = split_lines(ndjson);
    return ingest_lines(lines);
}

IngestResult ReadingStore::ingest_lines(std::span<const std::string> lines) {
    std::lock_guard writer(*writer_);
    auto next = std::make_shared<Snapshot>(*snapshot());

    IngestResult result;
    std::vector<Reading> fresh;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        auto reject = [&](ErrorCode code, std::string detail) {
            ++result.rejected;
            result.rejections.push_back({i + 1, code, std::move(detail)});
        };
        Reading r;
        try {
            r = parse_reading(lines[i]);
        } catch (const Error& e) {
            reject(e.code(), e.what());
            continue;
        }
        if (next->keys.contains({r.node_id, r.rx_timestamp_ms})) {
            ++result.duplicates;
            continue;
        }
        if (auto it = next->latest.find(r.node_id); it != next->latest.end() && r.rx_timestamp_ms < it->second) {
            reject(ErrorCode::OutOfOrder, fmt::format("node {} timestamp {} precedes {}", r.node_id,
                                                      r.rx_timestamp_ms, it->second));
            continue;
        }
        next->keys.insert({r.node_id, r.rx_timestamp_ms});
        next->latest[r.node_id] = r.rx_timestamp_ms;
        fresh.push_back(std::move(r));
        ++result.accepted;
    }
    if (fresh.empty()) return result;

    if (path_) {
        std::string batch;
        for (const auto& r : fresh) batch += r.line + '\n';
        std::ofstream out(*path_, std::ios::app | std::ios::binary);
        out.write(batch.data(), static_cast<std::streamsize>(batch.size()));
        out.flush();
        if (!out) {
            throw Error(ErrorCode::StoreUnavailable, fmt::format("append to '{}' failed", path_->string()));
        }
    }

    const auto mid = next->by_time.size();
    for (auto& r : fresh) next->by_time.push_back(std::move(r));
    std::stable_sort(next->by_time.begin() + static_cast<std::ptrdiff_t>(mid), next->by_time.end(), time_order);
    std::inplace_merge(next->by_time.begin(), next->by_time.begin() + static_cast<std::ptrdiff_t>(mid),
                       next->by_time.end(), time_order);

    std::unique_lock lock(*publish_);
    current_ = std::move(next);
    return result;
}

std::vector<Reading> ReadingStore::query(std::optional<std::uint8_t> node_id, std::int64_t t_from_ms,
                                         std::int64_t t_to_ms) const {
    if (t_from_ms > t_to_ms) {
        throw Error(ErrorCode::BadRange, fmt::format("from {} > to {}", t_from_ms, t_to_ms));
    }
    const auto snap = snapshot();
    const auto& v = snap->by_time;
    auto lo = std::lower_bound(v.begin(), v.end(), t_from_ms,
                               [](const Reading& r, std::int64_t t) { return r.rx_timestamp_ms < t; });
    std::vector<Reading> out;
    for (auto it = lo; it != v.end() && it->rx_timestamp_ms <= t_to_ms; ++it) {
        if (!node_id || it->node_id == *node_id) out.push_back(*it);
    }
    return out;
}

std::vector<Reading> ReadingStore::all() const {
    return snapshot()->by_time;
}

std::size_t ReadingStore::size() const {
    return snapshot()->by_time.size();
}

double metric_value(const Reading& r, AlarmMetric metric) {
    switch (metric) {
        case AlarmMetric::AccelMagnitudeMg: return r.accel_magnitude_mg();
        case AlarmMetric::TempC: return r.temp_c;
        case AlarmMetric::PressureKpa: return r.pressure_kpa;
    }
    return 0.0;
}

bool rule_violated(const AlarmRule& rule, const Reading& r) {
    if (!rule.enabled) return false;
    if (rule.node_id && *rule.node_id != r.node_id) return false;
    const double v = metric_value(r, rule.metric);
    switch (rule.comparator) {
        case Comparator::Greater: return v > rule.threshold;
        case Comparator::GreaterEqual: return v >= rule.threshold;
        case Comparator::Less: return v < rule.threshold;
        case Comparator::LessEqual: return v <= rule.threshold;
    }
    return false;
}

namespace {

std::string_view metric_name(AlarmMetric m) {
    switch (m) {
        case AlarmMetric::AccelMagnitudeMg: return "accel_magnitude_mg";
        case AlarmMetric::TempC: return "temp_c";
        case AlarmMetric::PressureKpa: return "pressure_kpa";
    }
    return "?";
}

}  // namespace

std::vector<AlarmRule> parse_rules(std::string_view json_text) {
    using nlohmann::json;
    auto fail = [](std::size_t i, const std::string& what) -> void {
        throw Error(ErrorCode::InvalidRule, fmt::format("rules[{}]: {}", i, what));
    };
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidRule, e.what());
    }
    if (!doc.is_array()) throw Error(ErrorCode::InvalidRule, "rules document must be a JSON array");

    std::vector<AlarmRule> rules;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& j = doc[i];
        if (!j.is_object()) fail(i, "expected an object");
        for (const auto& item : j.items()) {
            const auto& k = item.key();
            if (k != "name" && k != "metric" && k != "comparator" && k != "threshold" && k != "node_id" &&
                k != "enabled") {
                fail(i, fmt::format("unknown key '{}'", k));
            }
        }
        AlarmRule rule;
        rule.name = j.value("name", fmt::format("rule{}", i));

        const std::string metric = j.contains("metric") && j["metric"].is_string() ? j["metric"].get<std::string>() : "";
        if (metric == "accel_magnitude_mg") rule.metric = AlarmMetric::AccelMagnitudeMg;
        else if (metric == "temp_c") rule.metric = AlarmMetric::TempC;
        else if (metric == "pressure_kpa") rule.metric = AlarmMetric::PressureKpa;
        else fail(i, fmt::format("unknown metric '{}'", metric));

        const std::string cmp =
            j.contains("comparator") && j["comparator"].is_string() ? j["comparator"].get<std::string>() : "";
        if (cmp == ">") rule.comparator = Comparator::Greater;
        else if (cmp == ">=") rule.comparator = Comparator::GreaterEqual;
        else if (cmp == "<") rule.comparator = Comparator::Less;
        else if (cmp == "<=") rule.comparator = Comparator::LessEqual;
        else fail(i, fmt::format("unknown comparator '{}'", cmp));

        if (!j.contains("threshold") || !j["threshold"].is_number()) fail(i, "threshold must be a number");
        rule.threshold = j["threshold"].get<double>();
        if (!std::isfinite(rule.threshold)) fail(i, "threshold must be finite");

        if (j.contains("node_id") && !j["node_id"].is_null()) {
            if (!j["node_id"].is_number_unsigned() || j["node_id"].get<std::uint64_t>() > 255) {
                fail(i, "node_id must be an octet or null");
            }
            rule.node_id = static_cast<std::uint8_t>(j["node_id"].get<std::uint64_t>());
        }
        if (j.contains("enabled")) {
            if (!j["enabled"].is_boolean()) fail(i, "enabled must be a boolean");
            rule.enabled = j["enabled"].get<bool>();
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

std::vector<AlarmRule> load_rules(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidRule, fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_rules(ss.str());
}

std::vector<Alarm> evaluate_alarms(const ReadingStore& store, std::span<const AlarmRule> rules) {
    std::vector<Alarm> alarms;
    for (const Reading& r : store.all()) {
        for (std::size_t i = 0; i < rules.size(); ++i) {
            if (rule_violated(rules[i], r)) {
                alarms.push_back({i, rules[i].name, rules[i].metric, metric_value(r, rules[i].metric), r.rx_timestamp_ms, r});
            }
        }
    }
    return alarms;
}

std::string readings_to_json(std::span<const Reading> readings) {
    std::string out = "[";
    for (std::size_t i = 0; i < readings.size(); ++i) {
        out += (i == 0 ? "\n" : ",\n") + readings[i].line;
    }
    out += readings.empty() ? "]\n" : "\n]\n";
    return out;
}

std::string readings_to_csv(std::span<const Reading> readings) {
    std::string out = "node_id,rx_timestamp_ms,ax_mg,ay_mg,az_mg,temp_c,pressure_kpa,rssi_dbm\n";
    for (const auto& r : readings) {
        out += fmt::format("{},{},{},{},{},{:.2f},{:.2f},{}\n", r.node_id, r.rx_timestamp_ms, r.ax_mg, r.ay_mg,
                           r.az_mg, r.temp_c, r.pressure_kpa, r.rssi_dbm ? fmt::format("{:.1f}", *r.rssi_dbm) : "");
    }
    return out;
}

std::string alarms_to_json(std::span<const Alarm> alarms) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& a : alarms) {
        nlohmann::ordered_json o;
        o["rule"] = a.rule_name;
        o["rule_index"] = a.rule_index;
        o["metric"] = std::string(metric_name(a.metric));
        o["node_id"] = a.reading.node_id;
        o["fired_at_ms"] = a.fired_at_ms;
        o["value"] = a.value;
        o["reading"] = nlohmann::ordered_json::parse(a.reading.line);
        arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
}

std::string alarms_to_csv(std::span<const Alarm> alarms) {
    std::string out = "rule,rule_index,metric,node_id,fired_at_ms,value\n";
    for (const auto& a : alarms) {
        out += fmt::format("{},{},{},{},{},{}\n", a.rule_name, a.rule_index, metric_name(a.metric), a.reading.node_id,
                          a.fired_at_ms, a.value);
    }
    return out;
}

std::string ingest_result_to_json(const IngestResult& result) {
    nlohmann::ordered_json j;
    j["accepted"] = result.accepted;
    j["rejected"] = result.rejected;
    j["duplicates"] = result.duplicates;
    nlohmann::ordered_json rej = nlohmann::ordered_json::array();
    for (const auto& r : result.rejections) {
        rej.push_back({{"line", r.line_no}, {"reason", error_name(r.reason)}, {"detail", r.detail}});
    }
    j["rejections"] = std::move(rej);
    return j.dump(2) + "\n";
}

}  // namespace railmon
