#include "railmon/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "railmon/error.hpp"
#include "railmon/gateway.hpp"

namespace railmon {

std::string_view event_kind_name(EventKind kind) noexcept {
    switch (kind) {
        case EventKind::NodeWake: return "NodeWake";
        case EventKind::TxStart: return "TxStart";
        case EventKind::TxEnd: return "TxEnd";
        case EventKind::RxDeliver: return "RxDeliver";
        case EventKind::RxCollision: return "RxCollision";
    }
    return "?";
}

bool event_before(const SimEvent& a, const SimEvent& b) noexcept {
    return std::tuple(a.time_s, a.node_id, static_cast<int>(a.kind), a.cycle) <
           std::tuple(b.time_s, b.node_id, static_cast<int>(b.kind), b.cycle);
}

bool overlaps(const Transmission& a, const Transmission& b) noexcept {
    return a.start_s < b.end_s && b.start_s < a.end_s;
}

std::vector<bool> collision_resolve(std::span<const Transmission> txs, double capture_threshold_db) {
    std::vector<bool> delivered(txs.size(), true);
    for (std::size_t i = 0; i < txs.size(); ++i) {
        for (std::size_t j = 0; j < txs.size() && delivered[i]; ++j) {
            if (i == j || !overlaps(txs[i], txs[j])) continue;
            if (txs[i].rssi_dbm - txs[j].rssi_dbm < capture_threshold_db) delivered[i] = false;
        }
    }
    return delivered;
}

void validate(const Scenario& s) {
    std::vector<std::string> problems;
    auto check = [&](auto&& fn, const std::string& field) {
        try {
            fn();
        } catch (const Error& e) {
            problems.push_back(fmt::format("{}: {}", field, e.what()));
        }
    };
    if (!(s.duration_s > 0.0) || !std::isfinite(s.duration_s)) {
        problems.push_back(fmt::format("duration_s: must be positive, got {}", s.duration_s));
    }
    check([&] { validate(s.radio); }, "radio");
    check([&] { validate(s.path_loss); }, "path_loss");
    if (s.nodes.empty()) problems.emplace_back("nodes: at least one node required");

    std::set<std::uint8_t> seen;
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        const auto& n = s.nodes[i];
        const auto prefix = fmt::format("nodes[{}]", i);
        NodeConfig cfg = n.config;
        cfg.radio = s.radio;
        check([&] { validate(cfg); }, prefix);
        if (!seen.insert(n.config.node_id).second) {
            problems.push_back(fmt::format("{}.node_id: duplicate {}", prefix, n.config.node_id));
        }
        if (!(n.distance_m >= s.path_loss.reference_distance_m) || !std::isfinite(n.distance_m)) {
            problems.push_back(fmt::format("{}.distance_m: {} below reference distance {}", prefix, n.distance_m,
                                           s.path_loss.reference_distance_m));
        }
        if (!(n.start_offset_s >= 0.0) || !std::isfinite(n.start_offset_s)) {
            problems.push_back(fmt::format("{}.start_offset_s: must be non-negative", prefix));
        }
    }
    if (!problems.empty()) {
        std::string msg;
        for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
        throw Error(ErrorCode::ScenarioInvalid, msg);
    }
}

namespace {

struct NodeRun {
    NodeSpec spec;
    SensorNode node;
    LinkOutcome link;
    double toa_s = 0.0;
    double wake_s = 0.0;
    Transmission tx;
    WireFrame wire{};
    NodeReport report;
};

class Simulator {
public:
    Simulator(const Scenario& s, std::uint64_t seed, bool record_events)
        : scenario_(s), rng_(seed), record_(record_events) {
        std::vector<NodeSpec> specs = s.nodes;
        std::sort(specs.begin(), specs.end(),
                  [](const NodeSpec& a, const NodeSpec& b) { return a.config.node_id < b.config.node_id; });
        for (auto& spec : specs) {
            NodeConfig cfg = spec.config;
            cfg.radio = s.radio;
            const auto link = receive_decision(s.radio, s.path_loss, spec.distance_m);
            NodeRun run{std::move(spec), SensorNode(cfg), link, time_on_air_s(s.radio, kFrameSize), 0.0, {}, {}, {}};
            run.report.node_id = cfg.node_id;
            run.report.distance_m = run.spec.distance_m;
            run.report.rssi_dbm = link.rssi_dbm;
            runs_.push_back(std::move(run));
        }
    }

    SimReport run() {
        for (std::size_t i = 0; i < runs_.size(); ++i) {
            auto& r = runs_[i];
            const double t0 = r.spec.start_offset_s;
            r.node.step({}, t0);  // Init
            schedule_wake(i, 0);
        }
        while (!queue_.empty()) {
            const SimEvent ev = queue_.top();
            queue_.pop();
            if (record_) events_.push_back(ev);
            dispatch(ev);
        }
        return finish();
    }

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const noexcept { return event_before(b, a); }
    };

    double uniform01() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

    std::size_t index_of(std::uint8_t node_id) const {
        for (std::size_t i = 0; i < runs_.size(); ++i) {
            if (runs_[i].report.node_id == node_id) return i;
        }
        return runs_.size();
    }

    void push(double t, EventKind kind, std::uint8_t node, std::uint64_t cycle) {
        queue_.push(SimEvent{t, kind, node, cycle});
    }

    void schedule_wake(std::size_t i, std::uint64_t cycle) {
        auto& r = runs_[i];
        const auto& cfg = r.node.config();
        const double slot = r.spec.start_offset_s + static_cast<double>(cycle) * cfg.wake_period_s;
        if (!(slot < scenario_.duration_s)) return;
        const double jitter = cfg.jitter_s > 0.0 ? uniform01() * cfg.jitter_s : 0.0;
        push(slot + jitter, EventKind::NodeWake, cfg.node_id, cycle);
    }

    void dispatch(const SimEvent& ev) {
        const std::size_t i = index_of(ev.node_id);
        auto& r = runs_[i];
        const auto& cfg = r.node.config();
        switch (ev.kind) {
            case EventKind::NodeWake: {
                const auto stim = r.spec.stimulus.sample_at(ev.time_s);
                r.node.step(stim, ev.time_s);  // Sample
                r.node.step(stim, ev.time_s);  // Encode
                push(ev.time_s + cfg.active_window_s, EventKind::TxStart, ev.node_id, ev.cycle);
                break;
            }
            case EventKind::TxStart: {
                r.wire = *r.node.step({}, ev.time_s);
                r.tx = Transmission{ev.node_id, ev.time_s, ev.time_s + r.toa_s, r.link.rssi_dbm};
                on_air_.push_back(r.tx);
                ++r.report.sent;
                push(r.tx.end_s, EventKind::TxEnd, ev.node_id, ev.cycle);
                break;
            }
            case EventKind::TxEnd: {
                resolve(r, ev);
                r.node.step({}, ev.time_s);  // Sleep
                schedule_wake(i, ev.cycle + 1);
                break;
            }
            case EventKind::RxDeliver: {
                const RxMeta meta{std::llround(ev.time_s * 1000.0), r.link.rssi_dbm};
                gateway_.receive(r.wire, meta);
                timeline_.push_back({ev.time_s, ev.node_id, *meta.rx_timestamp_ms, r.link.rssi_dbm});
                ++r.report.delivered;
                break;
            }
            case EventKind::RxCollision:
                ++r.report.collided;
                break;
        }
    }

    void resolve(NodeRun& r, const SimEvent& ev) {
        const double horizon = ev.time_s - r.toa_s;
        while (!on_air_.empty() && on_air_.front().end_s <= horizon) on_air_.pop_front();

        if (!r.link.received) {
            ++r.report.out_of_range;
            return;
        }
        std::vector<Transmission> group{r.tx};
        for (const auto& other : on_air_) {
            const bool same = other.node_id == r.tx.node_id && other.start_s == r.tx.start_s;
            if (!same && overlaps(other, r.tx)) group.push_back(other);
        }
        const bool delivered = collision_resolve(group, scenario_.path_loss.capture_threshold_db)[0];
        push(ev.time_s, delivered ? EventKind::RxDeliver : EventKind::RxCollision, ev.node_id, ev.cycle);
    }

    SimReport finish() {
        SimReport out;
        out.duration_s = scenario_.duration_s;
        std::uint64_t sent = 0;
        std::uint64_t delivered = 0;
        for (auto& r : runs_) {
            r.report.energy_mah = r.node.state().consumed_mah;
            sent += r.report.sent;
            delivered += r.report.delivered;
            out.nodes.push_back(r.report);
        }
        out.delivery_ratio = sent > 0 ? static_cast<double>(delivered) / static_cast<double>(sent) : 0.0;
        out.timeline = std::move(timeline_);
        MemorySink sink;
        gateway_.flush(sink);
        out.uplink_lines = sink.lines();
        out.events = std::move(events_);
        return out;
    }

    const Scenario& scenario_;
    std::mt19937_64 rng_;
    bool record_;
    std::vector<NodeRun> runs_;
    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
    std::deque<Transmission> on_air_;
    std::vector<Delivery> timeline_;
    std::vector<SimEvent> events_;
    Gateway gateway_;
};

}  // namespace

SimReport run_scenario(const Scenario& s, const RunOptions& opts) {
    validate(s);
    const auto seed = opts.seed_override ? opts.seed_override : s.seed;
    if (!seed) {
        throw Error(ErrorCode::ScenarioInvalid, "seed: missing");
    }
    Simulator sim(s, *seed, opts.record_events);
    SimReport report = sim.run();
    report.seed = *seed;
    return report;
}

RangeSweep range_sweep(const Scenario& single_node, std::span<const double> distances, const RunOptions& opts) {
    if (single_node.nodes.size() != 1) {
        throw Error(ErrorCode::ScenarioInvalid,
                    fmt::format("nodes: range sweep needs exactly one node, got {}", single_node.nodes.size()));
    }
    RangeSweep out;
    for (double d : distances) {
        Scenario s = single_node;
        s.nodes[0].distance_m = d;
        const SimReport rep = run_scenario(s, opts);
        out.rows.push_back({d, rep.nodes[0].rssi_dbm, rep.delivery_ratio});
        if (rep.delivery_ratio == 1.0 && (!out.max_full_delivery_m || d > *out.max_full_delivery_m)) {
            out.max_full_delivery_m = d;
        }
    }
    return out;
}

}  // namespace railmon
