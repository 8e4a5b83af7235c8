// Copyright 2026 The somebridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOMEBRIDGE_BENCH_PIPELINE_HPP
#define SOMEBRIDGE_BENCH_PIPELINE_HPP

#include <condition_variable>
#include <cstring>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "somebridge/bench/trace.hpp"
#include "somebridge/bridge/driver.hpp"

namespace somebridge::bench {

/// The measured chain is A -> B -> C -> D: a bus publisher (A), the sending
/// route (B), the receiving route (C), and a bus subscriber (D). The inproc
/// transport hands B's notification straight to C on the calling thread and
/// carries the full point-count ladder; the udp transport runs two live
/// drivers over loopback sockets and is capped by the 64 KiB datagram limit,
/// since notifications travel as single datagrams.
enum class transport : std::uint8_t { inproc, udp };

inline constexpr std::string_view transport_name(transport t) {
    return t == transport::inproc ? "inproc" : "udp";
}

struct pipeline_config {
    transport mode = transport::inproc;
    /// PointCloud2 sizes in points, 16 bytes each.
    std::vector<std::size_t> points_ladder = {100, 1000, 5000, 10000, 50000, 100000, 500000};
    std::size_t samples_per_size = 30;
    std::size_t warmup_per_size = 3;
    duration_ns receive_timeout = seconds(2);
    std::uint16_t base_port = 47500; // udp mode claims base_port .. base_port+3
    std::uint64_t seed = 0xbe7c4;
};

struct size_result {
    std::size_t points = 0;
    std::size_t bus_bytes = 0;    // bus encoding size published at A
    std::size_t someip_bytes = 0; // converted payload size on the wire
    span_set spans;
    latency_stats end_to_end;   // A publish to D delivery
    std::uint64_t lost = 0;       // samples D never saw inside the timeout
    std::uint64_t mismatched = 0; // samples D saw with bytes differing from A
};

struct pipeline_report {
    transport mode = transport::inproc;
    std::vector<size_result> sizes;
};

namespace detail {

/// Deterministic PointCloud2 value: four float32 fields per point, 16-byte
/// point stride, random payload bytes.
inline schema::value bench_cloud(std::size_t points, std::uint64_t seed) {
    using schema::struct_value;
    using schema::value;

    struct_value stamp;
    stamp.fields = {value(std::int32_t(17)), value(std::uint32_t(500))};
    struct_value header;
    header.fields = {value(std::move(stamp)), value(std::string("bench_lidar"))};

    value::list field_list;
    const char* names[] = {"x", "y", "z", "intensity"};
    for (std::uint32_t i = 0; i < 4; ++i) {
        struct_value pf;
        pf.fields = {value(std::string(names[i])), value(std::uint32_t(i * 4)),
                     value(std::uint8_t(7)), value(std::uint32_t(1))};
        field_list.push_back(value(std::move(pf)));
    }

    byte_vec data(points * 16);
    std::mt19937_64 rng(seed);
    std::size_t i = 0;
    for (; i + 8 <= data.size(); i += 8) {
        std::uint64_t w = rng();
        std::memcpy(data.data() + i, &w, 8);
    }
    for (; i < data.size(); ++i) data[i] = static_cast<std::uint8_t>(rng());

    struct_value cloud;
    cloud.fields = {value(std::move(header)),
                    value(std::uint32_t(1)),
                    value(std::uint32_t(points)),
                    value(std::move(field_list)),
                    value(false),
                    value(std::uint32_t(16)),
                    value(std::uint32_t(points * 16)),
                    value(std::move(data)),
                    value(true)};
    return value(std::move(cloud));
}

inline bridge::route_config bench_route(schema::direction dir, std::uint16_t data_port) {
    bridge::route_config rc;
    rc.dir = dir;
    rc.topic = {"/bench/points", "sensor_msgs/PointCloud2"};
    rc.service_id = 0x3001;
    rc.instance_id = 0x0001;
    rc.event_id = 0x0031;
    rc.eventgroup_id = 0x0301;
    rc.major_version = 1;
    rc.minor_version = 0;
    rc.interface_name = "BenchPoints";
    rc.method_name = "send_points";
    rc.service_name = "bench_points";
    rc.package_name = "bench";
    rc.endpoint = {net::loopback_ipv4, data_port};
    return rc;
}

/// End-of-chain observer: counts deliveries, rechecks that D received the
/// exact bytes A published, and lets the harness block for the next arrival.
/// Payloads of a different length than the armed one are stragglers from an
/// earlier, differently sized sample that timed out; they are ignored so a
/// late arrival cannot be credited to the current size class.
struct delivery_probe {
    std::mutex m;
    std::condition_variable cv;
    byte_vec expected;
    std::uint64_t delivered = 0;
    std::uint64_t mismatched = 0;
    std::uint64_t seen = 0;

    void arm(const byte_vec& payload) {
        std::lock_guard lk(m);
        expected = payload;
    }

    void on_delivery(const byte_vec& payload) {
        {
            std::lock_guard lk(m);
            if (payload.size() != expected.size()) return;
            if (payload != expected) ++mismatched;
            ++delivered;
        }
        cv.notify_one();
    }

    bool await(duration_ns timeout) {
        std::unique_lock lk(m);
        bool ok = cv.wait_for(lk, std::chrono::nanoseconds(timeout),
                              [&] { return delivered > seen; });
        seen = delivered;
        return ok;
    }

    std::uint64_t take_mismatches() {
        std::lock_guard lk(m);
        return std::exchange(mismatched, 0);
    }
};

/// One measured pass at a fixed size. `send` publishes one prepared sample
/// through A; the probe observes D. The harness stamps the end-to-end span
/// itself; B and C stamp the conversion checkpoints through the shared
/// capture_sink.
template <class SendFn>
result<size_result> run_size(const schema::schema_registry& reg, const pipeline_config& cfg,
                             capture_sink& sink, delivery_probe& probe, std::size_t points,
                             SendFn&& send) {
    const auto* s = reg.find("sensor_msgs/PointCloud2");
    if (s == nullptr) return {errc::unknown_type, "sensor_msgs/PointCloud2 is not loaded"};
    auto value = bench_cloud(points, cfg.seed + points);
    auto bus_bytes = schema::encode_bus(reg, *s, value);
    if (!bus_bytes) return bus_bytes.err();
    auto someip_bytes = schema::convert(reg, *s, *bus_bytes, schema::direction::bus_to_someip);
    if (!someip_bytes) return someip_bytes.err();

    size_result out;
    out.points = points;
    out.bus_bytes = bus_bytes->size();
    out.someip_bytes = someip_bytes->size();

    probe.arm(*bus_bytes);
    for (std::size_t i = 0; i < cfg.warmup_per_size; ++i) {
        send(*bus_bytes);
        (void)probe.await(cfg.receive_timeout);
    }
    sink.clear();
    (void)probe.take_mismatches();

    std::vector<duration_ns> e2e;
    e2e.reserve(cfg.samples_per_size);
    for (std::size_t i = 0; i < cfg.samples_per_size; ++i) {
        time_point a = steady_now();
        send(*bus_bytes);
        if (!probe.await(cfg.receive_timeout)) {
            ++out.lost;
            continue;
        }
        e2e.push_back(steady_now() - a);
    }
    out.mismatched = probe.take_mismatches();

    auto cps = sink.paired();
    // A sample that timed out can still arrive while the next size runs;
    // keeping only records of this size's payload keeps such stragglers out
    // of the statistics.
    std::erase_if(cps, [&](const checkpoint& c) { return c.payload_bytes != out.someip_bytes; });
    auto spans = analyze(cps);
    if (!spans) return spans.err();
    out.spans = *spans;
    auto e2e_stats = compute_stats(std::move(e2e));
    if (!e2e_stats) return e2e_stats.err();
    out.end_to_end = *e2e_stats;
    return out;
}

inline result<pipeline_report> run_inproc(const schema::schema_registry& reg,
                                          const pipeline_config& cfg) {
    std::size_t per_size = cfg.samples_per_size + cfg.warmup_per_size;
    capture_sink sink(per_size + 8);

    bridge::bridge_route send_route(bench_route(schema::direction::bus_to_someip, 45000), reg,
                                    &sink);
    bridge::bridge_route recv_route(bench_route(schema::direction::someip_to_bus, 45001), reg,
                                    &sink);

    // Discovery runs on a synthetic clock: handshake once, then freeze time
    // so nothing expires while samples flow.
    manual_clock clk;
    if (auto r = send_route.start(clk.now); !r) return r.err();
    if (auto r = recv_route.start(clk.now); !r) return r.err();
    const net::endpoint send_sd{net::loopback_ipv4, 45002};
    const net::endpoint recv_sd{net::loopback_ipv4, 45003};
    for (int i = 0; i < 200 && !recv_route.forwarding(); ++i) {
        send_route.poll(clk.now);
        recv_route.poll(clk.now);
        for (auto& out : send_route.take_sd_outbound())
            recv_route.on_sd_message(out.msg, send_sd, clk.now);
        for (auto& out : recv_route.take_sd_outbound())
            send_route.on_sd_message(out.msg, recv_sd, clk.now);
        clk.advance(ms(50));
    }
    if (!recv_route.forwarding())
        return {errc::timeout, "inproc discovery handshake did not converge"};
    (void)send_route.take_events();
    (void)recv_route.take_events();

    // A and D are real bus endpoints; dispatch is inline, so one publish
    // drives the entire chain on this thread.
    bus::topic_bus bus_in, bus_out;
    delivery_probe probe;
    auto pub_a = bus_in.create_publisher({"/bench/points", "sensor_msgs/PointCloud2"});
    if (!pub_a) return pub_a.err();
    auto pub_c = bus_out.create_publisher({"/bench/points", "sensor_msgs/PointCloud2"});
    if (!pub_c) return pub_c.err();
    auto sub_d =
        bus_out.create_subscriber({"/bench/points", "sensor_msgs/PointCloud2"},
                                  [&](const bus::bus_sample& smp) { probe.on_delivery(smp.payload); });
    if (!sub_d) return sub_d.err();
    auto sub_b = bus_in.create_subscriber(
        {"/bench/points", "sensor_msgs/PointCloud2"}, [&](const bus::bus_sample& smp) {
            send_route.on_bus_sample(smp.payload, clk.now);
            for (auto& out : send_route.take_data_outbound())
                recv_route.on_someip_message(out.msg, clk.now);
            for (auto& payload : recv_route.take_bus_outbound()) (void)pub_c->publish(payload);
        });
    if (!sub_b) return sub_b.err();

    pipeline_report report;
    report.mode = transport::inproc;
    for (std::size_t points : cfg.points_ladder) {
        auto r = run_size(reg, cfg, sink, probe, points,
                          [&](const byte_vec& bytes) { (void)pub_a->publish(bytes); });
        if (!r) return r.err();
        report.sizes.push_back(std::move(*r));
    }
    return report;
}

inline result<pipeline_report> run_udp(const schema::schema_registry& reg,
                                       const pipeline_config& cfg) {
    std::size_t per_size = cfg.samples_per_size + cfg.warmup_per_size;
    capture_sink sink(per_size + 8);

    bus::topic_bus bus_in, bus_out;
    const net::endpoint sd_tx{net::loopback_ipv4, cfg.base_port};
    const net::endpoint sd_rx{net::loopback_ipv4, static_cast<std::uint16_t>(cfg.base_port + 1)};

    bridge::driver_config cfg_tx;
    cfg_tx.sd_bind = sd_tx;
    cfg_tx.sd_peers = {sd_rx};
    cfg_tx.timings = someip::sd_timings::fast();
    cfg_tx.seed = cfg.seed;
    bridge::driver_config cfg_rx;
    cfg_rx.sd_bind = sd_rx;
    cfg_rx.sd_peers = {sd_tx};
    cfg_rx.timings = someip::sd_timings::fast();
    cfg_rx.seed = cfg.seed + 1;

    bridge::bridge_driver sender(bus_in, reg, cfg_tx);
    bridge::bridge_driver receiver(bus_out, reg, cfg_rx);
    if (auto r = sender.add_route(
            bench_route(schema::direction::bus_to_someip,
                        static_cast<std::uint16_t>(cfg.base_port + 2)),
            &sink);
        !r)
        return r.err();
    if (auto r = receiver.add_route(
            bench_route(schema::direction::someip_to_bus,
                        static_cast<std::uint16_t>(cfg.base_port + 3)),
            &sink);
        !r)
        return r.err();
    if (auto r = sender.start(); !r) return r.err();
    if (auto r = receiver.start(); !r) return r.err();

    delivery_probe probe;
    auto sub_d =
        bus_out.create_subscriber({"/bench/points", "sensor_msgs/PointCloud2"},
                                  [&](const bus::bus_sample& smp) { probe.on_delivery(smp.payload); });
    if (!sub_d) return sub_d.err();
    auto pub_a = bus_in.create_publisher({"/bench/points", "sensor_msgs/PointCloud2"});
    if (!pub_a) return pub_a.err();

    time_point deadline = steady_now() + seconds(5);
    while (!receiver.forwarding(0) && steady_now() < deadline)
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    if (!receiver.forwarding(0))
        return {errc::timeout, "udp discovery handshake did not converge"};

    pipeline_report report;
    report.mode = transport::udp;
    for (std::size_t points : cfg.points_ladder) {
        auto r = run_size(reg, cfg, sink, probe, points,
                          [&](const byte_vec& bytes) { (void)pub_a->publish(bytes); });
        if (!r) return r.err();
        report.sizes.push_back(std::move(*r));
    }
    sender.stop();
    receiver.stop();
    return report;
}

} // namespace detail

/// Runs the ladder on the chosen transport and returns per-size statistics.
inline result<pipeline_report> run_pipeline(const schema::schema_registry& reg,
                                            const pipeline_config& cfg) {
    for (std::size_t points : cfg.points_ladder) {
        std::size_t someip_estimate = points * 16 + 256;
        if (cfg.mode == transport::udp && someip_estimate > 65000)
            return {errc::oversize_payload,
                    std::to_string(points) + " points exceed one UDP datagram; use the "
                                             "inproc transport for this size"};
    }
    return cfg.mode == transport::inproc ? detail::run_inproc(reg, cfg)
                                         : detail::run_udp(reg, cfg);
}

// ---- reporting ----

inline nlohmann::ordered_json stats_json(const latency_stats& s) {
    return {{"min_ns", s.min}, {"q1_ns", s.q1},   {"median_ns", s.median},
            {"q3_ns", s.q3},   {"max_ns", s.max}, {"count", s.count}};
}

inline nlohmann::ordered_json ratio_json(const ratio_stats& s) {
    return {{"min", s.min}, {"q1", s.q1},   {"median", s.median},
            {"q3", s.q3},   {"max", s.max}, {"count", s.count}};
}

inline nlohmann::ordered_json report_json(const pipeline_report& r) {
    nlohmann::ordered_json j;
    j["transport"] = transport_name(r.mode);
    j["sizes"] = nlohmann::ordered_json::array();
    for (const auto& s : r.sizes) {
        nlohmann::ordered_json e;
        e["points"] = s.points;
        e["bus_bytes"] = s.bus_bytes;
        e["someip_bytes"] = s.someip_bytes;
        e["lost"] = s.lost;
        e["mismatched"] = s.mismatched;
        e["convert_out"] = stats_json(s.spans.convert_out);
        e["convert_in"] = stats_json(s.spans.convert_in);
        e["communication"] = stats_json(s.spans.communication);
        e["ratio_out"] = ratio_json(s.spans.ratio_out);
        e["ratio_in"] = ratio_json(s.spans.ratio_in);
        e["end_to_end"] = stats_json(s.end_to_end);
        j["sizes"].push_back(std::move(e));
    }
    return j;
}

/// Fixed-width summary for terminals; one row per size, span medians in
/// microseconds, ratio medians in percent.
inline std::string report_table(const pipeline_report& r) {
    std::ostringstream os;
    os << "transport: " << transport_name(r.mode) << "\n";
    char head[128];
    std::snprintf(head, sizeof head, "%10s %12s %12s %12s %12s %9s %9s %6s\n", "points",
                  "payload_B", "conv_out_us", "conv_in_us", "comm_us", "ratio_out", "ratio_in",
                  "lost");
    os << head;
    for (const auto& s : r.sizes) {
        char row[160];
        std::snprintf(row, sizeof row, "%10zu %12zu %12.2f %12.2f %12.2f %8.2f%% %8.2f%% %6llu\n",
                      s.points, s.someip_bytes, double(s.spans.convert_out.median) / 1e3,
                      double(s.spans.convert_in.median) / 1e3,
                      double(s.spans.communication.median) / 1e3,
                      s.spans.ratio_out.median * 100.0, s.spans.ratio_in.median * 100.0,
                      static_cast<unsigned long long>(s.lost));
        os << row;
    }
    return os.str();
}

} // namespace somebridge::bench

#endif // SOMEBRIDGE_BENCH_PIPELINE_HPP
