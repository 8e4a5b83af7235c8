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

#ifndef SOMEBRIDGE_BENCH_MOCK_AP_HPP
#define SOMEBRIDGE_BENCH_MOCK_AP_HPP

#include <atomic>
#include <mutex>
#include <random>

#include "somebridge/net/udp_socket.hpp"
#include "somebridge/someip/message.hpp"
#include "somebridge/someip/sd_endpoint.hpp"

namespace somebridge::bench {

enum class mock_role : std::uint8_t { sender, receiver };

inline constexpr std::string_view mock_role_name(mock_role r) {
    return r == mock_role::sender ? "sender" : "receiver";
}

/// Wire-level identity and behavior of one peer. The identifiers must match
/// the bridge route the peer is talking to.
struct mock_ap_config {
    someip::service_key key{0x1234, 0x0001};
    std::uint16_t event_id = 0x0021;
    std::uint16_t eventgroup_id = 0x0103;
    std::uint8_t major_version = 1;
    std::uint32_t minor_version = 0;
    net::endpoint sd_bind{net::loopback_ipv4, 0};
    std::vector<net::endpoint> sd_peers; // multicast stand-ins on loopback
    net::endpoint data_bind{net::loopback_ipv4, 0};
    someip::sd_timings timings;
    std::uint64_t seed = 0x90c4;
    duration_ns send_interval = ms(100); // sender: notification cadence
    std::size_t payload_bytes = 64;      // sender: bytes per notification
    std::uint64_t message_limit = 0;     // sender: stop after N (0 = run until stopped)
    duration_ns discovery_timeout = seconds(5); // receiver: subscribe deadline
    duration_ns recv_poll = ms(20);
};

/// Stand-in for the application on the far side of the wire: it speaks the
/// SOME/IP message and SD formats through its own sockets and nothing else,
/// deliberately sharing no conversion or bus code with the bridge, so every
/// byte it produces or checks exercises the real protocol boundary.
///
/// The sender role offers the service and emits seeded pseudo-random
/// notification payloads at a fixed rate to every subscriber. Payloads are
/// framed as a big-endian u32 length followed by that many random bytes,
/// which is the SOME/IP encoding of the bundled somebridge/RawBytes type, so
/// a bridge route carrying that type converts them as-is. The receiver role
/// finds the service, subscribes, validates incoming notifications and logs
/// their digests. run() owns the calling thread until stopped.
class mock_ap_peer {
public:
    mock_ap_peer(mock_role role, mock_ap_config cfg)
        : role_(role),
          cfg_(std::move(cfg)),
          sd_(role == mock_role::sender ? someip::sd_role::server : someip::sd_role::client,
              cfg_.timings, cfg_.seed) {}

    const mock_ap_config& config() const { return cfg_; }
    net::endpoint sd_local() const { return sd_local_; }
    net::endpoint data_local() const { return data_local_; }

    result<void> open() {
        auto sd = net::udp_socket::bind(cfg_.sd_bind);
        if (!sd) return sd.err();
        sd_socket_ = std::move(*sd);
        if (auto r = sd_socket_.set_recv_timeout(cfg_.recv_poll); !r) return r;
        auto sd_local = sd_socket_.local_endpoint();
        if (!sd_local) return sd_local.err();
        sd_local_ = *sd_local;

        auto data = net::udp_socket::bind(cfg_.data_bind);
        if (!data) return data.err();
        data_socket_ = std::move(*data);
        if (auto r = data_socket_.set_recv_timeout(cfg_.recv_poll); !r) return r;
        auto data_local = data_socket_.local_endpoint();
        if (!data_local) return data_local.err();
        data_local_ = *data_local;
        return {};
    }

    /// Runs the peer until `stop` is set, the sender's message limit is
    /// reached, or the receiver misses its discovery deadline (errc::timeout,
    /// the CLI's exit-code-3 path). When `withdraw_on_stop` is false the loop
    /// just stops emitting, simulating a crashed process: no ttl=0 goes out
    /// and peers only notice once the TTL lapses.
    result<void> run(const std::atomic<bool>& stop, bool withdraw_on_stop = true) {
        time_point now = steady_now();
        if (role_ == mock_role::sender) {
            if (auto r = sd_.offer_service(cfg_.key, cfg_.major_version, cfg_.minor_version,
                                           data_local_, now);
                !r)
                return r;
        } else {
            if (auto r = sd_.find_service(cfg_.key, cfg_.major_version, now); !r) return r;
        }
        flush_sd();

        const time_point discovery_deadline = now + cfg_.discovery_timeout;
        time_point next_send = now + cfg_.send_interval;
        byte_vec buf(70000);
        std::mt19937_64 rng(cfg_.seed);

        while (!stop.load(std::memory_order_relaxed)) {
            now = steady_now();
            sd_.poll(now);
            flush_sd();
            for (const auto& ev : sd_.take_events()) react(ev, now);

            if (role_ == mock_role::receiver && !subscribed_ && now >= discovery_deadline)
                return {errc::timeout, "service was not discovered before the deadline"};

            if (role_ == mock_role::sender && now >= next_send) {
                emit_notification(rng, now);
                next_send = now + cfg_.send_interval;
                if (cfg_.message_limit != 0 && sent_ >= cfg_.message_limit) break;
            }

            drain_sd(now);
            drain_data(buf);
        }

        if (withdraw_on_stop) {
            now = steady_now();
            if (role_ == mock_role::sender)
                (void)sd_.stop_offer(cfg_.key, now);
            else
                (void)sd_.unsubscribe(cfg_.key, cfg_.eventgroup_id, now);
            flush_sd();
        }
        return {};
    }

    // ---- observability, safe to read while run() is on another thread ----

    std::uint64_t sent() const { return sent_.load(std::memory_order_relaxed); }
    std::uint64_t received() const { return received_.load(std::memory_order_relaxed); }
    std::uint64_t rejected() const { return rejected_.load(std::memory_order_relaxed); }
    bool subscribed() const { return subscribed_.load(std::memory_order_relaxed); }
    bool has_subscribers() const { return has_subscribers_.load(std::memory_order_relaxed); }

    /// Digests in transmission order: the sender appends one per emitted
    /// notification, the receiver one per accepted notification.
    std::vector<std::uint64_t> digests() const {
        std::lock_guard lk(digest_m_);
        return digests_;
    }

private:
    void flush_sd() {
        for (auto& out : sd_.take_outbound()) {
            auto frame = someip::encode_sd_frame(out.msg);
            if (!frame) continue;
            if (out.multicast) {
                for (const auto& peer : cfg_.sd_peers) (void)sd_socket_.send_to(*frame, peer);
            } else {
                (void)sd_socket_.send_to(*frame, out.dest);
            }
        }
    }

    void react(const someip::sd_event& ev, time_point now) {
        using kind = someip::sd_event::kind;
        switch (ev.what) {
        case kind::offer_seen:
            if (role_ == mock_role::receiver && !subscribed_)
                (void)sd_.subscribe_eventgroup(cfg_.key, cfg_.eventgroup_id, data_local_, now);
            break;
        case kind::subscribed:
            subscribed_ = true;
            break;
        case kind::offer_lost:
        case kind::subscribe_timeout:
            subscribed_ = false;
            break;
        case kind::subscriber_added:
            has_subscribers_ = true;
            break;
        case kind::subscriber_removed:
        case kind::subscriber_expired:
            has_subscribers_ =
                !sd_.subscribers(cfg_.key, cfg_.eventgroup_id, now).empty();
            break;
        case kind::find_timeout:
            break;
        }
        flush_sd();
    }

    void emit_notification(std::mt19937_64& rng, time_point now) {
        auto subs = sd_.subscribers(cfg_.key, cfg_.eventgroup_id, now);
        if (subs.empty()) return;
        byte_vec payload(4 + cfg_.payload_bytes);
        auto n = static_cast<std::uint32_t>(cfg_.payload_bytes);
        payload[0] = static_cast<std::uint8_t>(n >> 24);
        payload[1] = static_cast<std::uint8_t>(n >> 16);
        payload[2] = static_cast<std::uint8_t>(n >> 8);
        payload[3] = static_cast<std::uint8_t>(n);
        for (std::size_t i = 4; i < payload.size(); ++i)
            payload[i] = static_cast<std::uint8_t>(rng());
        session_ = session_ == 0xFFFF ? 1 : session_ + 1;
        auto msg = someip::make_notification(cfg_.key.service_id, cfg_.event_id,
                                             cfg_.major_version, session_, payload);
        auto frame = someip::encode_message(msg);
        if (!frame) return;
        for (const auto& sub : subs) (void)data_socket_.send_to(*frame, sub);
        record_digest(fnv1a64(payload));
        sent_.fetch_add(1, std::memory_order_relaxed);
    }

    void drain_sd(time_point now) {
        byte_vec buf(2048);
        for (;;) {
            auto dg = sd_socket_.recv_from(buf);
            if (!dg || !*dg) break;
            auto decoded = someip::decode_message(byte_span(buf.data(), (*dg)->size));
            if (!decoded || !someip::is_sd_message(decoded->msg)) continue;
            auto sd = someip::decode_sd(decoded->msg.payload);
            if (!sd) continue;
            if (sd->malformed_entries > 0) sd_.note_malformed(sd->malformed_entries);
            sd_.handle_sd_message(sd->msg, (*dg)->source, now);
            flush_sd();
            for (const auto& ev : sd_.take_events()) react(ev, now);
        }
    }

    void drain_data(byte_vec& buf) {
        for (;;) {
            auto dg = data_socket_.recv_from(buf);
            if (!dg || !*dg) break;
            if (role_ != mock_role::receiver) continue;
            auto decoded = someip::decode_message(byte_span(buf.data(), (*dg)->size));
            if (!decoded) {
                rejected_.fetch_add(1, std::memory_order_relaxed);
                continue;
            }
            const auto& h = decoded->msg.header;
            bool valid = h.service_id == cfg_.key.service_id &&
                         h.method_id == (cfg_.event_id | someip::event_id_flag) &&
                         h.type == someip::message_type::notification &&
                         h.interface_version == cfg_.major_version;
            if (!valid) {
                rejected_.fetch_add(1, std::memory_order_relaxed);
                continue;
            }
            record_digest(fnv1a64(decoded->msg.payload));
            received_.fetch_add(1, std::memory_order_relaxed);
        }
    }

    void record_digest(std::uint64_t d) {
        std::lock_guard lk(digest_m_);
        digests_.push_back(d);
    }

    mock_role role_;
    mock_ap_config cfg_;
    someip::sd_endpoint sd_;
    net::udp_socket sd_socket_;
    net::udp_socket data_socket_;
    net::endpoint sd_local_;
    net::endpoint data_local_;
    std::uint16_t session_ = 0;

    std::atomic<std::uint64_t> sent_{0};
    std::atomic<std::uint64_t> received_{0};
    std::atomic<std::uint64_t> rejected_{0};
    std::atomic<bool> subscribed_{false};
    std::atomic<bool> has_subscribers_{false};
    mutable std::mutex digest_m_;
    std::vector<std::uint64_t> digests_;
};

} // namespace somebridge::bench

#endif // SOMEBRIDGE_BENCH_MOCK_AP_HPP
