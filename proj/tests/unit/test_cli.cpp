#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "railmon/cloud_ingest.hpp"
#include "railmon/frame_codec.hpp"
#include "railmon/netsim.hpp"
#include "railmon/phy_model.hpp"
#include "railmon/scenario_io.hpp"
#include "railmon_cli/cli.hpp"

using namespace railmon;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args, const std::string& input = {}) {
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = cli::run(args, in, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("usage errors exit 2 with empty stdout") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {},
             {"frobnicate"},
             {"encode"},
             {"encode", "--node", "x"},
             {"toa", "--bogus"},
             {"query", "--store", "x", "--format", "xml"},
             {"simulate"},
         }) {
        const auto r = run(args);
        CAPTURE(args.size());
        CHECK(r.code == 2);
        CHECK(r.out.empty());
        CHECK_FALSE(r.err.empty());
    }
}

TEST_CASE("help goes to stdout") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("encode") != std::string::npos);
}

TEST_CASE("encode and decode") {
    const auto e = run({"encode", "--node", "6"});
    CHECK(e.code == 0);
    CHECK(e.out == "A57E10060000000000000000000000000000000000\n");

    const auto e2 = run({"encode", "--node", "6", "--ax", "1000", "--temp", "25", "--pres", "100"});
    TelemetryFrame f;
    f.accel_x_mg = 1000;
    f.temp_centi_c = 2500;
    f.pressure_centi_kpa = 10000;
    CHECK(e2.out == to_hex(encode_frame(f)) + "\n");

    const auto d = run({"decode", "--ts", "0", "--rssi", "-80"}, e.out);
    CHECK(d.code == 0);
    CHECK(d.out == frame_to_json(TelemetryFrame{}, RxMeta{0, -80.0}) + "\n");

    const auto bad = run({"encode", "--node", "5"});
    CHECK(bad.code == 1);
    CHECK(bad.out.empty());
    CHECK(bad.err.find("InvalidNodeId") != std::string::npos);

    const auto bad_hdr = run({"decode"}, std::string(42, '0'));
    CHECK(bad_hdr.code == 1);
    CHECK(bad_hdr.err.find("BadHeader") != std::string::npos);
}

TEST_CASE("toa matches the library") {
    const auto r = run({"toa", "--payload", "21"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["time_on_air_s"].get<double>() == doctest::Approx(time_on_air_s(RadioParams{}, 21)).epsilon(1e-12));
    CHECK(j["bit_rate_bps"].get<double>() == doctest::Approx(1171.875));

    const auto bad = run({"toa", "--crden", "4"});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("InvalidParams") != std::string::npos);
}

TEST_CASE("params prints defaults as JSON") {
    const auto r = run({"params"});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::accept(r.out));
}

TEST_CASE("simulate matches the library byte-for-byte") {
    const auto r = run({"simulate", "scenarios/star4.json"});
    REQUIRE(r.code == 0);
    CHECK(r.out == report_to_json(run_scenario(load_scenario("scenarios/star4.json"))));

    const auto seeded = run({"simulate", "scenarios/star4.json", "--seed", "9"});
    CHECK(nlohmann::json::parse(seeded.out)["seed"] == 9);

    const auto missing = run({"simulate", "scenarios/does_not_exist.json"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("ScenarioInvalid") != std::string::npos);
}

TEST_CASE("simulate, ingest, query pipeline") {
    const auto dir = oracle::temp_dir("cli");
    const auto uplink = (dir / "uplink.ndjson").string();
    const auto store = (dir / "store.ndjson").string();
    REQUIRE(run({"simulate", "scenarios/star4.json", "--uplink", uplink, "--out", (dir / "r.json").string()}).code ==
            0);
    const auto ing = run({"ingest", "--store", store, uplink});
    REQUIRE(ing.code == 0);
    CHECK(nlohmann::json::parse(ing.out)["accepted"] == 40);
    const auto again = run({"ingest", "--store", store, uplink});
    CHECK(nlohmann::json::parse(again.out)["duplicates"] == 40);

    const auto q = run({"query", "--store", store});
    REQUIRE(q.code == 0);
    CHECK(nlohmann::json::parse(q.out).size() == 40);
    const auto q8 = run({"query", "--store", store, "--node", "8", "--format", "csv"});
    CHECK(std::count(q8.out.begin(), q8.out.end(), '\n') == 11);
    const auto rng = run({"query", "--store", store, "--from", "10", "--to", "5"});
    CHECK(rng.code == 1);
    CHECK(rng.err.find("BadRange") != std::string::npos);

    const auto al = run({"alarms", "--store", store, "--rules", "rules/default_rules.json"});
    CHECK(al.code == 0);
    CHECK(nlohmann::json::parse(al.out).empty());
    std::filesystem::remove_all(dir);
}

TEST_CASE("range sweep") {
    const auto r = run({"range-sweep", "scenarios/range_single.json", "--distances", "1000,5000", "--exponent", "4"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["rows"][0]["delivery_ratio"] == 1.0);
    CHECK(j["rows"][1]["delivery_ratio"] == 0.0);
}
