#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "railmon/cloud_ingest.hpp"
#include "railmon/frame_codec.hpp"
#include "railmon/netsim.hpp"
#include "railmon/phy_model.hpp"
#include "railmon/scenario_io.hpp"

using namespace railmon;

namespace {

TelemetryFrame sample_frame() {
    TelemetryFrame f;
    f.node_id = 8;
    f.accel_x_mg = -123;
    f.accel_y_mg = 45;
    f.accel_z_mg = 1002;
    f.temp_centi_c = 2317;
    f.pressure_centi_kpa = 5012;
    return f;
}

void BM_EncodeFrame(benchmark::State& state) {
    const auto f = sample_frame();
    for (auto _ : state) benchmark::DoNotOptimize(encode_frame(f));
}
BENCHMARK(BM_EncodeFrame);

void BM_DecodeFrame(benchmark::State& state) {
    const auto w = encode_frame(sample_frame());
    for (auto _ : state) benchmark::DoNotOptimize(decode_frame(w));
}
BENCHMARK(BM_DecodeFrame);

void BM_FrameToJson(benchmark::State& state) {
    const auto f = sample_frame();
    for (auto _ : state) benchmark::DoNotOptimize(frame_to_json(f, RxMeta{123456, -87.5}));
}
BENCHMARK(BM_FrameToJson);

void BM_TimeOnAir(benchmark::State& state) {
    const RadioParams p;
    std::int64_t pl = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(time_on_air_s(p, pl));
        pl = (pl + 1) & 63;
    }
}
BENCHMARK(BM_TimeOnAir);

Scenario bench_scenario(int nodes, double duration_s) {
    Scenario s;
    s.seed = 42;
    s.duration_s = duration_s;
    for (int i = 0; i < nodes; ++i) {
        NodeSpec n;
        n.config.node_id = static_cast<std::uint8_t>(6 + i);
        n.distance_m = 100.0 + 150.0 * i;
        n.start_offset_s = 5.0 * i;
        s.nodes.push_back(n);
    }
    return s;
}

void BM_RunScenario(benchmark::State& state) {
    const auto s = bench_scenario(4, static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_scenario(s));
}
BENCHMARK(BM_RunScenario)->Arg(600)->Arg(86400);

void BM_StoreQuery(benchmark::State& state) {
    ReadingStore store;
    std::vector<std::string> lines;
    for (std::int64_t ts = 0; ts < 100000; ++ts) {
        auto f = sample_frame();
        f.node_id = static_cast<std::uint8_t>(6 + ts % 4);
        lines.push_back(std::string(R"({"topic":"rail/track/)") + std::to_string(f.node_id) + R"(/telemetry",)" +
                        frame_to_json(f, RxMeta{ts, -90.0}).substr(1));
    }
    store.ingest_lines(lines);
    std::int64_t from = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(store.query(std::uint8_t{7}, from, from + 1000));
        from = (from + 7919) % 99000;
    }
}
BENCHMARK(BM_StoreQuery);

}  // namespace

BENCHMARK_MAIN();
