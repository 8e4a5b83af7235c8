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

#ifndef SOMEBRIDGE_BRIDGE_DRIVER_HPP
#define SOMEBRIDGE_BRIDGE_DRIVER_HPP

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>

#include "somebridge/bridge/route.hpp"
#include "somebridge/bus/bus.hpp"
#include "somebridge/net/udp_socket.hpp"

namespace somebridge::bridge {

/// Runtime wiring for one bridge process. Service discovery normally rides
/// IP multicast; on loopback the driver replicates every multicast-intent
/// message to a static peer list instead, which keeps the SD state machines
/// unchanged (documented in docs/bus-wire.md).
struct driver_config {
    net::endpoint sd_bind{net::loopback_ipv4, 0};
    std::vector<net::endpoint> sd_peers;
    someip::sd_timings timings{};
    std::uint64_t seed = 0x5eed;
    duration_ns recv_poll = ms(50);
    /// Called for route lifecycle events, keyed by route index. Runs on
    /// driver threads; must not call back into the driver.
    std::function<void(std::size_t, const route_event&)> on_event;
};

/// Owns the sockets, threads, and bus handles around a set of routes.
/// Each route keeps its single-threaded contract behind a per-route mutex.
class bridge_driver {
public:
    bridge_driver(bus::topic_bus& bus, const schema::schema_registry& reg, driver_config cfg)
        : bus_(bus), reg_(reg), cfg_(std::move(cfg)) {}

    ~bridge_driver() { stop(); }

    bridge_driver(const bridge_driver&) = delete;
    bridge_driver& operator=(const bridge_driver&) = delete;

    /// Registers a route before start(). The schema must resolve now so a
    /// bad config fails before any SD traffic could leave.
    result<void> add_route(route_config rc, trace_sink* sink = nullptr) {
        if (running_) return {errc::invalid_config, "routes must be added before start"};
        if (reg_.find(rc.topic.type_name) == nullptr)
            return {errc::unknown_type, "no schema for " + rc.topic.type_name};
        auto cell = std::make_unique<route_cell>(std::move(rc), reg_, sink, cfg_.timings,
                                                 cfg_.seed + cells_.size());
        cells_.push_back(std::move(cell));
        return {};
    }

    std::size_t route_count() const { return cells_.size(); }

    result<void> start() {
        if (running_) return {errc::invalid_config, "driver already started"};

        auto sd = net::udp_socket::bind(cfg_.sd_bind);
        if (!sd) return sd.err();
        sd_socket_ = std::move(*sd);
        if (auto r = sd_socket_.set_recv_timeout(cfg_.recv_poll); !r) return r;
        auto sd_local = sd_socket_.local_endpoint();
        if (!sd_local) return sd_local.err();
        sd_local_ = *sd_local;

        time_point now = steady_now();
        for (auto& cell : cells_) {
            auto data = net::udp_socket::bind(cell->route.config().endpoint);
            if (!data) return data.err();
            cell->data_socket = std::move(*data);
            if (auto r = cell->data_socket.set_recv_timeout(cfg_.recv_poll); !r) return r;

            const auto& rc = cell->route.config();
            if (rc.dir == schema::direction::someip_to_bus) {
                auto pub = bus_.create_publisher(rc.topic);
                if (!pub) return pub.err();
                cell->publisher.emplace(std::move(*pub));
            }
            if (auto r = cell->route.start(now); !r) return r;
            flush(*cell);
        }

        running_ = true;
        sd_rx_ = std::thread([this] { sd_rx_loop(); });
        timer_ = std::thread([this] { timer_loop(); });
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            auto& cell = *cells_[i];
            const auto& rc = cell.route.config();
            if (rc.dir == schema::direction::someip_to_bus) {
                cell.data_rx = std::thread([this, &cell] { data_rx_loop(cell); });
            } else {
                auto sub = bus_.create_subscriber(rc.topic, [this, &cell](
                                                                const bus::bus_sample& s) {
                    std::lock_guard lk(cell.m);
                    cell.route.on_bus_sample(s.payload, steady_now());
                    flush(cell);
                });
                if (!sub) {
                    stop();
                    return sub.err();
                }
                cell.subscriber.emplace(std::move(*sub));
            }
        }
        return {};
    }

    /// Withdraws offers and subscriptions (ttl=0 on the wire), then tears
    /// down threads and sockets.
    void stop() {
        if (!running_.exchange(false)) return;
        timer_cv_.notify_all();
        if (timer_.joinable()) timer_.join();
        if (sd_rx_.joinable()) sd_rx_.join();
        for (auto& cell : cells_) {
            if (cell->data_rx.joinable()) cell->data_rx.join();
            cell->subscriber.reset();
        }
        time_point now = steady_now();
        for (auto& cell : cells_) {
            std::lock_guard lk(cell->m);
            cell->route.stop(now);
            flush(*cell);
        }
        sd_socket_.close();
        for (auto& cell : cells_) cell->data_socket.close();
    }

    net::endpoint sd_local() const { return sd_local_; }

    /// Thread-safe; lets loopback setups exchange ephemeral SD ports after
    /// both sides are up.
    void add_sd_peer(net::endpoint peer) {
        std::lock_guard lk(peers_m_);
        peers_.push_back(peer);
    }

    route_counters counters(std::size_t i) const {
        std::lock_guard lk(cells_[i]->m);
        return cells_[i]->route.counters();
    }

    bool forwarding(std::size_t i) const {
        std::lock_guard lk(cells_[i]->m);
        return cells_[i]->route.forwarding();
    }

    /// Runs f with the route locked; test and tooling access.
    template <class F>
    auto with_route(std::size_t i, F&& f) {
        std::lock_guard lk(cells_[i]->m);
        return f(cells_[i]->route);
    }

private:
    struct route_cell {
        route_cell(route_config rc, const schema::schema_registry& reg, trace_sink* sink,
                   someip::sd_timings timings, std::uint64_t seed)
            : route(std::move(rc), reg, sink, timings, seed) {}

        mutable std::mutex m;
        bridge_route route;
        net::udp_socket data_socket;
        std::optional<bus::publisher> publisher;
        std::optional<bus::subscriber> subscriber;
        std::thread data_rx;
    };

    /// Sends everything the route queued. Callers hold the cell mutex.
    void flush(route_cell& cell) {
        for (auto& out : cell.route.take_sd_outbound()) {
            auto frame = someip::encode_sd_frame(out.msg);
            if (!frame) continue;
            if (out.multicast) {
                for (const auto& peer : peers_snapshot()) (void)sd_socket_.send_to(*frame, peer);
            } else {
                (void)sd_socket_.send_to(*frame, out.dest);
            }
        }
        for (auto& out : cell.route.take_data_outbound()) {
            auto frame = someip::encode_message(out.msg);
            if (!frame) continue;
            (void)cell.data_socket.send_to(*frame, out.dest);
        }
        for (auto& payload : cell.route.take_bus_outbound()) {
            if (cell.publisher) (void)cell.publisher->publish(payload);
        }
        if (cfg_.on_event) {
            std::size_t idx = index_of(cell);
            for (const auto& ev : cell.route.take_events()) cfg_.on_event(idx, ev);
        } else {
            (void)cell.route.take_events();
        }
    }

    std::size_t index_of(const route_cell& cell) const {
        for (std::size_t i = 0; i < cells_.size(); ++i)
            if (cells_[i].get() == &cell) return i;
        return 0;
    }

    std::vector<net::endpoint> peers_snapshot() const {
        std::lock_guard lk(peers_m_);
        return peers_;
    }

    void sd_rx_loop() {
        byte_vec buf(2048);
        while (running_) {
            auto dg = sd_socket_.recv_from(buf);
            if (!dg || !*dg) continue;
            auto decoded = someip::decode_message(byte_span(buf).first((*dg)->size));
            if (!decoded || !someip::is_sd_message(decoded->msg)) continue;
            auto sd = someip::decode_sd(decoded->msg.payload);
            if (!sd) continue;
            time_point now = steady_now();
            for (auto& cell : cells_) {
                std::lock_guard lk(cell->m);
                if (sd->malformed_entries > 0)
                    cell->route.sd().note_malformed(sd->malformed_entries);
                cell->route.on_sd_message(sd->msg, (*dg)->source, now);
                flush(*cell);
            }
        }
    }

    void data_rx_loop(route_cell& cell) {
        byte_vec buf(70000);
        while (running_) {
            auto dg = cell.data_socket.recv_from(buf);
            if (!dg || !*dg) continue;
            auto decoded = someip::decode_message(byte_span(buf).first((*dg)->size));
            if (!decoded) continue;
            std::lock_guard lk(cell.m);
            cell.route.on_someip_message(decoded->msg, steady_now());
            flush(cell);
        }
    }

    void timer_loop() {
        std::unique_lock lk(timer_m_);
        while (running_) {
            std::optional<time_point> next;
            for (auto& cell : cells_) {
                std::lock_guard cl(cell->m);
                auto nw = cell->route.next_wakeup();
                if (nw && (!next || *nw < *next)) next = *nw;
            }
            time_point now = steady_now();
            duration_ns wait = next ? std::max<duration_ns>(*next - now, 0) : seconds(1);
            wait = std::min<duration_ns>(wait, seconds(1));
            if (wait > 0)
                timer_cv_.wait_for(lk, std::chrono::nanoseconds(wait),
                                   [this] { return !running_; });
            if (!running_) break;
            now = steady_now();
            for (auto& cell : cells_) {
                std::lock_guard cl(cell->m);
                cell->route.poll(now);
                flush(*cell);
            }
        }
    }

    bus::topic_bus& bus_;
    const schema::schema_registry& reg_;
    driver_config cfg_;

    mutable std::mutex peers_m_;
    std::vector<net::endpoint> peers_ = cfg_.sd_peers;

    std::vector<std::unique_ptr<route_cell>> cells_;
    net::udp_socket sd_socket_;
    net::endpoint sd_local_;

    std::atomic<bool> running_{false};
    std::thread sd_rx_, timer_;
    std::mutex timer_m_;
    std::condition_variable timer_cv_;
};

} // namespace somebridge::bridge

#endif // SOMEBRIDGE_BRIDGE_DRIVER_HPP
