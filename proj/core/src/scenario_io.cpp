#include "railmon/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "railmon/error.hpp"
#include "railmon/gateway.hpp"
#include "railmon/sensor_models.hpp"

namespace railmon {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::ScenarioInvalid, fmt::format("{}: {}", field, what));
}

class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) invalid(path_, "expected an object");
    }

    void allow_only(std::initializer_list<const char*> keys) const {
        for (const auto& item : obj_.items()) {
            bool ok = false;
            for (const char* k : keys) ok = ok || item.key() == k;
            if (!ok) invalid(field(item.key().c_str()), "unknown key");
        }
    }

    bool has(const char* key) const { return obj_.contains(key); }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_number()) invalid(field(key), "expected a number");
        return v.get<double>();
    }

    double required_number(const char* key) const {
        if (!has(key)) invalid(field(key), "missing");
        return number(key, 0.0);
    }

    std::int64_t integer(const char* key, std::int64_t fallback) const {
        if (!has(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_number_integer()) invalid(field(key), "expected an integer");
        return v.get<std::int64_t>();
    }

    bool boolean(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = obj_.at(key);
        if (!v.is_boolean()) invalid(field(key), "expected a boolean");
        return v.get<bool>();
    }

    std::string string(const char* key) const {
        if (!has(key)) return {};
        const auto& v = obj_.at(key);
        if (!v.is_string()) invalid(field(key), "expected a string");
        return v.get<std::string>();
    }

    std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& obj_;
    std::string path_;
};

RadioParams parse_radio(const json& j) {
    Reader r(j, "radio");
    r.allow_only({"spreading_factor", "bandwidth_hz", "coding_rate_denominator", "preamble_symbols",
                  "explicit_header", "radio_crc_on", "low_data_rate_opt", "tx_power_dbm", "rx_sensitivity_dbm",
                  "frequency_hz", "rx_timeout_symbols"});
    RadioParams p;
    p.spreading_factor = static_cast<int>(r.integer("spreading_factor", p.spreading_factor));
    p.bandwidth_hz = r.integer("bandwidth_hz", p.bandwidth_hz);
    p.coding_rate_denominator = static_cast<int>(r.integer("coding_rate_denominator", p.coding_rate_denominator));
    p.preamble_symbols = static_cast<int>(r.integer("preamble_symbols", p.preamble_symbols));
    p.explicit_header = r.boolean("explicit_header", p.explicit_header);
    p.radio_crc_on = r.boolean("radio_crc_on", p.radio_crc_on);
    p.low_data_rate_opt = r.boolean("low_data_rate_opt", p.low_data_rate_opt);
    p.tx_power_dbm = r.number("tx_power_dbm", p.tx_power_dbm);
    p.rx_sensitivity_dbm = r.number("rx_sensitivity_dbm", p.rx_sensitivity_dbm);
    p.frequency_hz = r.integer("frequency_hz", p.frequency_hz);
    p.rx_timeout_symbols = static_cast<int>(r.integer("rx_timeout_symbols", p.rx_timeout_symbols));
    return p;
}

PathLossModel parse_path_loss(const json& j, const RadioParams& radio) {
    Reader r(j, "path_loss");
    r.allow_only({"reference_distance_m", "reference_loss_db", "exponent", "capture_threshold_db"});
    PathLossModel m;
    m.reference_distance_m = r.number("reference_distance_m", m.reference_distance_m);
    // Default reference loss: free space at the reference distance and carrier.
    const double fspl = m.reference_distance_m > 0.0
                            ? free_space_loss_db(static_cast<double>(radio.frequency_hz), m.reference_distance_m)
                            : m.reference_loss_db;
    m.reference_loss_db = r.number("reference_loss_db", fspl);
    m.exponent = r.number("exponent", m.exponent);
    m.capture_threshold_db = r.number("capture_threshold_db", m.capture_threshold_db);
    return m;
}

NodeSpec parse_node(const json& j, std::size_t index) {
    Reader r(j, fmt::format("nodes[{}]", index));
    r.allow_only({"node_id", "distance_m", "wake_period_s", "jitter_s", "stimulus_csv", "start_offset_s",
                  "active_window_s", "battery_mah", "currents"});
    NodeSpec n;
    if (!r.has("node_id")) invalid(r.field("node_id"), "missing");
    const auto id = r.integer("node_id", 0);
    if (id < 0 || id > 255) invalid(r.field("node_id"), fmt::format("{} is not an octet", id));
    n.config.node_id = static_cast<std::uint8_t>(id);
    n.distance_m = r.required_number("distance_m");
    n.config.wake_period_s = r.number("wake_period_s", n.config.wake_period_s);
    n.config.jitter_s = r.number("jitter_s", n.config.jitter_s);
    n.config.active_window_s = r.number("active_window_s", n.config.active_window_s);
    n.config.battery_mah = r.number("battery_mah", n.config.battery_mah);
    n.start_offset_s = r.number("start_offset_s", n.start_offset_s);
    if (r.has("currents")) {
        Reader c(j.at("currents"), r.field("currents"));
        c.allow_only({"tx_ma", "listen_ma", "sleep_ua", "sensor_ua"});
        auto& cur = n.config.currents;
        cur.tx_ma = c.number("tx_ma", cur.tx_ma);
        cur.listen_ma = c.number("listen_ma", cur.listen_ma);
        cur.sleep_ua = c.number("sleep_ua", cur.sleep_ua);
        cur.sensor_ua = c.number("sensor_ua", cur.sensor_ua);
    }
    n.stimulus_csv = r.string("stimulus_csv");
    if (!n.stimulus_csv.empty()) {
        try {
            n.stimulus = StimulusTrace::load_csv(n.stimulus_csv);
        } catch (const Error& e) {
            invalid(r.field("stimulus_csv"), e.what());
        }
    }
    return n;
}

ordered_json radio_json(const RadioParams& p) {
    ordered_json j;
    j["spreading_factor"] = p.spreading_factor;
    j["bandwidth_hz"] = p.bandwidth_hz;
    j["coding_rate_denominator"] = p.coding_rate_denominator;
    j["preamble_symbols"] = p.preamble_symbols;
    j["explicit_header"] = p.explicit_header;
    j["radio_crc_on"] = p.radio_crc_on;
    j["low_data_rate_opt"] = p.low_data_rate_opt;
    j["tx_power_dbm"] = p.tx_power_dbm;
    j["rx_sensitivity_dbm"] = p.rx_sensitivity_dbm;
    j["frequency_hz"] = p.frequency_hz;
    j["rx_timeout_symbols"] = p.rx_timeout_symbols;
    return j;
}

ordered_json path_loss_json(const PathLossModel& m) {
    ordered_json j;
    j["reference_distance_m"] = m.reference_distance_m;
    j["reference_loss_db"] = m.reference_loss_db;
    j["exponent"] = m.exponent;
    j["capture_threshold_db"] = m.capture_threshold_db;
    return j;
}

}  // namespace

Scenario parse_scenario(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        invalid("document", e.what());
    }
    Reader r(doc, "");
    r.allow_only({"duration_s", "seed", "radio", "path_loss", "nodes"});

    Scenario s;
    s.duration_s = r.required_number("duration_s");
    if (r.has("seed")) {
        const auto& v = doc.at("seed");
        if (!v.is_number_unsigned()) invalid("seed", "expected a non-negative integer");
        s.seed = v.get<std::uint64_t>();
    }
    if (r.has("radio")) s.radio = parse_radio(doc.at("radio"));
    s.path_loss = parse_path_loss(r.has("path_loss") ? doc.at("path_loss") : json::object(), s.radio);
    if (!r.has("nodes") || !doc.at("nodes").is_array()) invalid("nodes", "expected an array");
    const auto& nodes = doc.at("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) s.nodes.push_back(parse_node(nodes[i], i));
    validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) invalid("path", fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string report_to_json(const SimReport& report) {
    ordered_json j;
    j["seed"] = report.seed;
    j["duration_s"] = report.duration_s;
    j["delivery_ratio"] = report.delivery_ratio;
    std::uint64_t sent = 0, delivered = 0, collided = 0, out_of_range = 0;
    ordered_json nodes = ordered_json::array();
    for (const auto& n : report.nodes) {
        ordered_json o;
        o["node_id"] = n.node_id;
        o["distance_m"] = n.distance_m;
        o["rssi_dbm"] = n.rssi_dbm;
        o["sent"] = n.sent;
        o["delivered"] = n.delivered;
        o["collided"] = n.collided;
        o["out_of_range"] = n.out_of_range;
        o["energy_mah"] = n.energy_mah;
        nodes.push_back(std::move(o));
        sent += n.sent;
        delivered += n.delivered;
        collided += n.collided;
        out_of_range += n.out_of_range;
    }
    j["totals"] = {{"sent", sent}, {"delivered", delivered}, {"collided", collided}, {"out_of_range", out_of_range}};
    j["nodes"] = std::move(nodes);
    ordered_json timeline = ordered_json::array();
    for (const auto& d : report.timeline) {
        ordered_json o;
        o["time_s"] = d.time_s;
        o["node_id"] = d.node_id;
        o["rx_timestamp_ms"] = d.rx_timestamp_ms;
        o["rssi_dbm"] = d.rssi_dbm;
        timeline.push_back(std::move(o));
    }
    j["timeline"] = std::move(timeline);
    return j.dump(2) + "\n";
}

std::string timeline_to_csv(const SimReport& report) {
    std::string out = "time_s,node_id,rx_timestamp_ms,rssi_dbm\n";
    for (const auto& d : report.timeline) {
        out += fmt::format("{},{},{},{}\n", d.time_s, d.node_id, d.rx_timestamp_ms, d.rssi_dbm);
    }
    return out;
}

std::string range_sweep_to_json(const RangeSweep& sweep) {
    ordered_json j;
    ordered_json rows = ordered_json::array();
    for (const auto& r : sweep.rows) {
        rows.push_back({{"distance_m", r.distance_m}, {"rssi_dbm", r.rssi_dbm}, {"delivery_ratio", r.delivery_ratio}});
    }
    j["rows"] = std::move(rows);
    j["max_full_delivery_m"] = sweep.max_full_delivery_m ? ordered_json(*sweep.max_full_delivery_m) : ordered_json();
    return j.dump(2) + "\n";
}

std::string defaults_to_json(const RadioParams& radio, const PathLossModel& path_loss) {
    const NodeConfig node;
    ordered_json j;
    j["radio"] = radio_json(radio);
    j["derived"] = {{"symbol_time_s", symbol_time_s(radio)},
                    {"bit_rate_bps", air_bit_rate_bps(radio)},
                    {"frame_bytes", kFrameSize},
                    {"frame_time_on_air_s", time_on_air_s(radio, kFrameSize)},
                    {"link_budget_db", link_budget_db(radio)}};
    j["path_loss"] = path_loss_json(path_loss);
    ordered_json n;
    n["wake_period_s"] = node.wake_period_s;
    n["jitter_s"] = node.jitter_s;
    n["active_window_s"] = node.active_window_s;
    n["battery_mah"] = node.battery_mah;
    n["currents"] = {{"tx_ma", node.currents.tx_ma},
                     {"listen_ma", node.currents.listen_ma},
                     {"sleep_ua", node.currents.sleep_ua},
                     {"sensor_ua", node.currents.sensor_ua}};
    j["node"] = std::move(n);
    const GatewayConfig gw;
    j["gateway"] = {{"gateway_id", gw.gateway_id}, {"serial_baud", gw.serial_baud}};
    j["spi"] = {{"clock_hz", adxl362::kSpiClockHz}, {"cpol", adxl362::kSpiCpol}, {"cpha", adxl362::kSpiCpha}};
    return j.dump(2) + "\n";
}

}  // namespace railmon
