#include "railmon_cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "railmon/cloud_ingest.hpp"
#include "railmon/error.hpp"
#include "railmon/frame_codec.hpp"
#include "railmon/netsim.hpp"
#include "railmon/phy_model.hpp"
#include "railmon/scenario_io.hpp"

namespace railmon::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string slurp(std::istream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_file(const std::string& path, ErrorCode code) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(code, fmt::format("cannot open '{}'", path));
    return slurp(in);
}

void write_output(const std::optional<std::string>& path, const std::string& text, std::ostream& out) {
    if (!path) {
        out << text;
        return;
    }
    std::ofstream f(*path, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw Error(ErrorCode::SinkUnavailable, fmt::format("cannot write '{}'", *path));
}

std::int32_t to_i32(std::int64_t v, const char* what) {
    if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
        throw Error(ErrorCode::RangeError, fmt::format("{} {} does not fit a 32-bit field", what, v));
    }
    return static_cast<std::int32_t>(v);
}

std::int64_t to_centi(double v, std::int64_t lo, std::int64_t hi, const char* what) {
    const double scaled = std::round(v * 100.0);
    if (!(scaled >= static_cast<double>(lo) && scaled <= static_cast<double>(hi))) {
        throw Error(ErrorCode::RangeError, fmt::format("{} {} outside sensor range", what, v));
    }
    return static_cast<std::int64_t>(scaled);
}

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("RAILMON_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    char* end = nullptr;
    const auto v = std::strtoull(raw, &end, 10);
    if (*end != '\0') throw Error(ErrorCode::ScenarioInvalid, fmt::format("RAILMON_SEED '{}' is not an integer", raw));
    return v;
}

Scenario load_with_seed_default(const std::string& path) {
    Scenario s = load_scenario(path);
    if (!s.seed) s.seed = env_seed();
    return s;
}

std::string human_report(const SimReport& r) {
    std::string out = fmt::format("seed {}  duration {} s  delivery ratio {:.4f}\n", r.seed, r.duration_s,
                                  r.delivery_ratio);
    out += fmt::format("{:>4} {:>10} {:>9} {:>6} {:>9} {:>8} {:>12} {:>12}\n", "node", "dist_m", "rssi_dbm", "sent",
                       "delivered", "collided", "out_of_range", "energy_mah");
    for (const auto& n : r.nodes) {
        out += fmt::format("{:>4} {:>10.1f} {:>9.2f} {:>6} {:>9} {:>8} {:>12} {:>12.6f}\n", n.node_id, n.distance_m,
                           n.rssi_dbm, n.sent, n.delivered, n.collided, n.out_of_range, n.energy_mah);
    }
    return out;
}

struct EncodeArgs {
    int node = -1;
    int gateway = kGatewayId;
    int reserved = 0;
    std::int64_t ax = 0, ay = 0, az = 0;
    double temp = 0.0, pres = 0.0;
    bool human = false;
};

struct DecodeArgs {
    std::optional<std::int64_t> ts;
    std::optional<double> rssi;
    bool human = false;
};

struct ToaArgs {
    RadioParams radio;
    std::int64_t payload = static_cast<std::int64_t>(kFrameSize);
    bool implicit = false;
    bool no_crc = false;
    bool ldro = false;
    bool sweep = false;
    std::int64_t sweep_max = 64;
    bool human = false;
};

struct SimArgs {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out, uplink, timeline_csv;
    bool human = false;
};

struct SweepArgs {
    std::string scenario;
    std::vector<double> distances;
    std::optional<double> exponent;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool human = false;
};

struct StoreArgs {
    std::string store;
    std::vector<std::string> inputs;
    std::optional<int> node;
    std::int64_t from = std::numeric_limits<std::int64_t>::min();
    std::int64_t to = std::numeric_limits<std::int64_t>::max();
    std::string rules;
    std::string format = "json";
    bool human = false;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out) {
    if (a.node < 0 || a.node > 255) {
        throw Error(ErrorCode::InvalidNodeId, fmt::format("node id {} not in [{}, {}]", a.node, kMinNodeId, kMaxNodeId));
    }
    if (a.gateway < 0 || a.gateway > 255 || a.reserved < 0 || a.reserved > 255) {
        throw Error(ErrorCode::RangeError, "gateway and reserved must be octets");
    }
    TelemetryFrame f;
    f.gateway_id = static_cast<std::uint8_t>(a.gateway);
    f.node_id = static_cast<std::uint8_t>(a.node);
    f.reserved = static_cast<std::uint8_t>(a.reserved);
    f.accel_x_mg = to_i32(a.ax, "ax");
    f.accel_y_mg = to_i32(a.ay, "ay");
    f.accel_z_mg = to_i32(a.az, "az");
    f.temp_centi_c = static_cast<std::int16_t>(to_centi(a.temp, kMinTempCentiC, kMaxTempCentiC, "temp"));
    f.pressure_centi_kpa = static_cast<std::uint16_t>(to_centi(a.pres, 0, kMaxPressureCentiKpa, "pres"));
    const WireFrame wire = encode_frame(f);
    if (a.human) {
        std::string spaced;
        for (std::size_t i = 0; i < wire.size(); ++i) spaced += fmt::format("{}{:02X}", i ? " " : "", wire[i]);
        out << spaced << '\n';
    } else {
        out << to_hex(wire) << '\n';
    }
    return kExitOk;
}

int cmd_decode(const DecodeArgs& a, std::istream& in, std::ostream& out) {
    const auto bytes = from_hex(slurp(in));
    const TelemetryFrame f = decode_frame(bytes);
    if (a.human) {
        out << fmt::format("gateway 0x{:02X}  node {}  reserved {}\n", f.gateway_id, f.node_id, f.reserved);
        out << fmt::format("accel  x {} mg  y {} mg  z {} mg\n", f.accel_x_mg, f.accel_y_mg, f.accel_z_mg);
        out << fmt::format("temp   {:.2f} C\npress  {:.2f} kPa\n", f.temp_centi_c / 100.0,
                           f.pressure_centi_kpa / 100.0);
    } else {
        out << frame_to_json(f, RxMeta{a.ts, a.rssi}) << '\n';
    }
    return kExitOk;
}

int cmd_toa(ToaArgs a, std::ostream& out) {
    a.radio.explicit_header = !a.implicit;
    a.radio.radio_crc_on = !a.no_crc;
    a.radio.low_data_rate_opt = a.ldro;
    validate(a.radio);

    ordered_json j;
    j["spreading_factor"] = a.radio.spreading_factor;
    j["bandwidth_hz"] = a.radio.bandwidth_hz;
    j["coding_rate_denominator"] = a.radio.coding_rate_denominator;
    j["preamble_symbols"] = a.radio.preamble_symbols;
    j["explicit_header"] = a.radio.explicit_header;
    j["radio_crc_on"] = a.radio.radio_crc_on;
    j["low_data_rate_opt"] = a.radio.low_data_rate_opt;
    j["symbol_time_s"] = symbol_time_s(a.radio);
    j["bit_rate_bps"] = air_bit_rate_bps(a.radio);
    if (a.sweep) {
        if (a.sweep_max < 0) throw Error(ErrorCode::InvalidParams, "sweep-max must be non-negative");
        ordered_json rows = ordered_json::array();
        for (std::int64_t pl = 0; pl <= a.sweep_max; ++pl) {
            rows.push_back({{"payload_bytes", pl},
                            {"payload_symbols", payload_symbols(a.radio, pl)},
                            {"time_on_air_s", time_on_air_s(a.radio, pl)}});
        }
        if (a.human) {
            out << fmt::format("{:>8} {:>8} {:>12}\n", "bytes", "symbols", "toa_s");
            for (const auto& r : rows) {
                out << fmt::format("{:>8} {:>8} {:>12.6f}\n", r["payload_bytes"].get<std::int64_t>(),
                                   r["payload_symbols"].get<std::int64_t>(), r["time_on_air_s"].get<double>());
            }
            return kExitOk;
        }
        j["rows"] = std::move(rows);
    } else {
        j["payload_bytes"] = a.payload;
        j["payload_symbols"] = payload_symbols(a.radio, a.payload);
        j["time_on_air_s"] = time_on_air_s(a.radio, a.payload);
        if (a.human) {
            out << fmt::format("symbol time  {:.6f} s\nbit rate     {:.3f} bps\ntime on air  {:.6f} s ({} payload symbols)\n",
                               j["symbol_time_s"].get<double>(), j["bit_rate_bps"].get<double>(),
                               j["time_on_air_s"].get<double>(), j["payload_symbols"].get<std::int64_t>());
            return kExitOk;
        }
    }
    out << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_simulate(const SimArgs& a, std::ostream& out) {
    const Scenario s = load_with_seed_default(a.scenario);
    RunOptions opts;
    opts.seed_override = a.seed;
    const SimReport report = run_scenario(s, opts);
    if (a.uplink) {
        std::string lines;
        for (const auto& l : report.uplink_lines) lines += l + '\n';
        write_output(a.uplink, lines, out);
    }
    if (a.timeline_csv) write_output(a.timeline_csv, timeline_to_csv(report), out);
    write_output(a.out, a.human ? human_report(report) : report_to_json(report), out);
    return kExitOk;
}

int cmd_range_sweep(const SweepArgs& a, std::ostream& out) {
    Scenario s = load_with_seed_default(a.scenario);
    if (a.exponent) {
        s.path_loss.exponent = *a.exponent;
        validate(s.path_loss);
    }
    RunOptions opts;
    opts.seed_override = a.seed;
    const RangeSweep sweep = range_sweep(s, a.distances, opts);
    if (a.human) {
        std::string text = fmt::format("{:>10} {:>10} {:>8}\n", "dist_m", "rssi_dbm", "ratio");
        for (const auto& r : sweep.rows) {
            text += fmt::format("{:>10.1f} {:>10.2f} {:>8.4f}\n", r.distance_m, r.rssi_dbm, r.delivery_ratio);
        }
        text += sweep.max_full_delivery_m ? fmt::format("max full-delivery distance: {} m\n", *sweep.max_full_delivery_m)
                                          : std::string("max full-delivery distance: none\n");
        write_output(a.out, text, out);
    } else {
        write_output(a.out, range_sweep_to_json(sweep), out);
    }
    return kExitOk;
}

int cmd_ingest(const StoreArgs& a, std::istream& in, std::ostream& out) {
    ReadingStore store = ReadingStore::open(a.store);
    std::string text;
    if (a.inputs.empty()) {
        text = slurp(in);
    } else {
        for (const auto& path : a.inputs) {
            text += read_file(path, ErrorCode::StoreUnavailable);
            if (!text.empty() && text.back() != '\n') text += '\n';
        }
    }
    const IngestResult result = store.ingest_text(text);
    if (a.human) {
        out << fmt::format("accepted {}  rejected {}  duplicates {}\n", result.accepted, result.rejected,
                           result.duplicates);
        for (const auto& r : result.rejections) {
            out << fmt::format("  line {}: {}\n", r.line_no, r.detail);
        }
    } else {
        out << ingest_result_to_json(result);
    }
    return kExitOk;
}

std::optional<std::uint8_t> node_filter(const std::optional<int>& node) {
    if (!node) return std::nullopt;
    if (*node < 0 || *node > 255) {
        throw Error(ErrorCode::InvalidNodeId, fmt::format("node id {} is not an octet", *node));
    }
    return static_cast<std::uint8_t>(*node);
}

int cmd_query(const StoreArgs& a, std::ostream& out) {
    const ReadingStore store = ReadingStore::open(a.store);
    const auto readings = store.query(node_filter(a.node), a.from, a.to);
    out << (a.format == "csv" || a.human ? readings_to_csv(readings) : readings_to_json(readings));
    return kExitOk;
}

int cmd_alarms(const StoreArgs& a, std::ostream& out) {
    const ReadingStore store = ReadingStore::open(a.store);
    const auto rules = load_rules(a.rules);
    const auto alarms = evaluate_alarms(store, rules);
    out << (a.format == "csv" || a.human ? alarms_to_csv(alarms) : alarms_to_json(alarms));
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rail track condition monitoring: frame codec, LoRa link model, network simulator and ingest"};
    app.name("railmon");
    app.require_subcommand(1);

    EncodeArgs enc;
    auto* encode = app.add_subcommand("encode", "Encode a telemetry frame as uppercase hex");
    encode->add_option("--node", enc.node, "Node id (6..9)")->required();
    encode->add_option("--gateway", enc.gateway, "Gateway id")->capture_default_str();
    encode->add_option("--reserved", enc.reserved, "Reserved octet")->capture_default_str();
    encode->add_option("--ax", enc.ax, "X acceleration, mg");
    encode->add_option("--ay", enc.ay, "Y acceleration, mg");
    encode->add_option("--az", enc.az, "Z acceleration, mg");
    encode->add_option("--temp", enc.temp, "Temperature, degC");
    encode->add_option("--pres", enc.pres, "Pressure, kPa");
    encode->add_flag("--human", enc.human, "Space-separated bytes");

    DecodeArgs dec;
    auto* decode = app.add_subcommand("decode", "Decode a hex frame from stdin to JSON");
    decode->add_option("--ts", dec.ts, "rx_timestamp_ms to attach");
    decode->add_option("--rssi", dec.rssi, "rssi_dbm to attach");
    decode->add_flag("--human", dec.human, "Tabular output");

    ToaArgs toa;
    auto* toa_cmd = app.add_subcommand("toa", "Symbol time, air bit rate and time on air");
    toa_cmd->add_option("--sf", toa.radio.spreading_factor, "Spreading factor")->capture_default_str();
    toa_cmd->add_option("--bw", toa.radio.bandwidth_hz, "Bandwidth, Hz")->capture_default_str();
    toa_cmd->add_option("--crden", toa.radio.coding_rate_denominator, "Coding rate denominator (CR = 4/n)")
        ->capture_default_str();
    toa_cmd->add_option("--preamble", toa.radio.preamble_symbols, "Preamble symbols")->capture_default_str();
    toa_cmd->add_option("--payload", toa.payload, "Payload length, bytes")->capture_default_str();
    toa_cmd->add_flag("--implicit", toa.implicit, "Implicit header mode");
    toa_cmd->add_flag("--no-crc", toa.no_crc, "Disable radio CRC");
    toa_cmd->add_flag("--ldro", toa.ldro, "Low data rate optimization");
    toa_cmd->add_flag("--sweep", toa.sweep, "Emit a table for payload 0..sweep-max");
    toa_cmd->add_option("--sweep-max", toa.sweep_max, "Largest payload in the sweep")->capture_default_str();
    toa_cmd->add_flag("--human", toa.human, "Tabular output");

    bool params_human = false;
    auto* params = app.add_subcommand("params", "Print default radio, path-loss, node and gateway parameters");
    params->add_flag("--human", params_human, "Accepted for symmetry; output is JSON");

    SimArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run a network scenario");
    simulate->add_option("scenario", sim.scenario, "Scenario JSON file")->required();
    simulate->add_option("--seed", sim.seed, "Override the scenario seed");
    simulate->add_option("--out", sim.out, "Write the report here instead of stdout");
    simulate->add_option("--uplink", sim.uplink, "Write gateway uplink NDJSON here");
    simulate->add_option("--timeline-csv", sim.timeline_csv, "Write the delivery timeline CSV here");
    simulate->add_flag("--human", sim.human, "Tabular report");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("range-sweep", "Delivery ratio versus distance for a single-node scenario");
    sweep->add_option("scenario", sw.scenario, "Single-node scenario JSON file")->required();
    sweep->add_option("--distances", sw.distances, "Comma-separated distances, m")->delimiter(',')->required();
    sweep->add_option("--exponent", sw.exponent, "Override the path-loss exponent");
    sweep->add_option("--seed", sw.seed, "Override the scenario seed");
    sweep->add_option("--out", sw.out, "Write the table here instead of stdout");
    sweep->add_flag("--human", sw.human, "Tabular output");

    StoreArgs st;
    auto* ingest = app.add_subcommand("ingest", "Append gateway NDJSON lines to a reading store");
    ingest->add_option("--store", st.store, "Store file (NDJSON)")->required();
    ingest->add_option("inputs", st.inputs, "NDJSON files (default: stdin)");
    ingest->add_flag("--human", st.human, "Summary text");

    auto* query = app.add_subcommand("query", "Readings in a time range");
    query->add_option("--store", st.store, "Store file (NDJSON)")->required();
    query->add_option("--node", st.node, "Only this node");
    query->add_option("--from", st.from, "Start, rx_timestamp_ms (inclusive)");
    query->add_option("--to", st.to, "End, rx_timestamp_ms (inclusive)");
    query->add_option("--format", st.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    query->add_flag("--human", st.human, "Same as --format csv");

    auto* alarms = app.add_subcommand("alarms", "Evaluate threshold rules over a store");
    alarms->add_option("--store", st.store, "Store file (NDJSON)")->required();
    alarms->add_option("--rules", st.rules, "Rules JSON file")->required();
    alarms->add_option("--format", st.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    alarms->add_flag("--human", st.human, "Same as --format csv");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            return app.exit(e, out, err);
        }
        app.exit(e, err, err);
        return kExitUsage;
    }

    try {
        if (*encode) return cmd_encode(enc, out);
        if (*decode) return cmd_decode(dec, in, out);
        if (*toa_cmd) return cmd_toa(toa, out);
        if (*params) {
            out << defaults_to_json(RadioParams{}, PathLossModel{});
            return kExitOk;
        }
        if (*simulate) return cmd_simulate(sim, out);
        if (*sweep) return cmd_range_sweep(sw, out);
        if (*ingest) return cmd_ingest(st, in, out);
        if (*query) return cmd_query(st, out);
        if (*alarms) return cmd_alarms(st, out);
    } catch (const Error& e) {
        err << e.what() << '\n';
        return kExitDomainError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomainError;
    }
    return kExitUsage;
}

}  // namespace railmon::cli
