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

#ifndef SOMEBRIDGE_BUS_UDP_LINK_HPP
#define SOMEBRIDGE_BUS_UDP_LINK_HPP

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "somebridge/bus/bus.hpp"
#include "somebridge/bytes.hpp"
#include "somebridge/clock.hpp"
#include "somebridge/core.hpp"
#include "somebridge/net/endpoint.hpp"
#include "somebridge/net/udp_socket.hpp"

namespace somebridge::bus {

/// Wire constants for the UDP-loopback transport; layout in docs/bus-wire.md.
inline constexpr std::size_t fragment_chunk = 16 * 1024;
inline constexpr std::size_t fragment_header_size = 16;
inline constexpr std::size_t sample_prelude_size = 8; // origin timestamp
inline constexpr std::uint8_t bus_wire_version = 1;

struct fragment_header {
    std::uint32_t topic_hash = 0;
    std::uint16_t publisher_id = 0;
    std::uint8_t version = bus_wire_version;
    std::uint32_t sample_seq = 0; // low 32 bits of the publisher sequence
    std::uint16_t frag_index = 0;
    std::uint16_t frag_count = 0;
};

inline void encode_fragment_header(const fragment_header& h, byte_writer& w) {
    w.u32_be(h.topic_hash);
    w.u16_be(h.publisher_id);
    w.u8(h.version);
    w.u8(0);
    w.u32_be(h.sample_seq);
    w.u16_be(h.frag_index);
    w.u16_be(h.frag_count);
}

inline std::optional<fragment_header> decode_fragment_header(byte_reader& r) {
    if (!r.can_read(fragment_header_size)) return std::nullopt;
    fragment_header h;
    h.topic_hash = r.u32_be();
    h.publisher_id = r.u16_be();
    h.version = r.u8();
    r.skip(1);
    h.sample_seq = r.u32_be();
    h.frag_index = r.u16_be();
    h.frag_count = r.u16_be();
    return h;
}

/// Hash identifying a (name, type) topic pair on the wire.
inline std::uint32_t topic_hash(const topic& t) {
    std::string key = t.name + "|" + t.type_name;
    return fnv1a32(byte_span(reinterpret_cast<const std::uint8_t*>(key.data()), key.size()));
}

struct udp_link_config {
    net::endpoint bind = {net::loopback_ipv4, 0};
    std::vector<net::endpoint> peers;
    int socket_buffer = 1 << 22;
    /// Crude sender-side flow control so long fragment bursts do not overrun
    /// the receiver's socket buffer: nap briefly every `pace_every` fragments.
    std::size_t pace_every = 16;
    duration_ns pace_sleep = us(200);
    duration_ns recv_poll = ms(50);
};

struct udp_link_stats {
    std::uint64_t sent_frames = 0;
    std::uint64_t sent_samples = 0;
    std::uint64_t received_frames = 0;
    std::uint64_t delivered_samples = 0;
    std::uint64_t lost_samples = 0;       // sequence gaps and abandoned units
    std::uint64_t bad_frames = 0;
    std::uint64_t oversize_samples = 0;
};

/// Bridges one local topic_bus to remote peers over loopback UDP. Exported
/// topics fan out to the static peer list; imported topics are reassembled
/// and republished locally with the origin timestamp. Configure each topic
/// in one direction only per endpoint pair, or samples will circulate.
class udp_link {
public:
    udp_link(topic_bus& local, udp_link_config cfg)
        : local_(local), cfg_(std::move(cfg)) {}

    udp_link(const udp_link&) = delete;
    udp_link& operator=(const udp_link&) = delete;
    ~udp_link() { stop(); }

    result<void> start() {
        auto sock = net::udp_socket::bind(cfg_.bind);
        if (!sock) return sock.err();
        socket_ = std::move(*sock);
        (void)socket_.set_buffer_sizes(cfg_.socket_buffer);
        if (auto r = socket_.set_recv_timeout(cfg_.recv_poll); !r) return r;
        auto local_ep = socket_.local_endpoint();
        if (!local_ep) return local_ep.err();
        local_endpoint_ = *local_ep;
        running_ = true;
        rx_thread_ = std::thread([this] { rx_loop(); });
        return {};
    }

    void stop() {
        if (!running_.exchange(false)) return;
        if (rx_thread_.joinable()) rx_thread_.join();
        socket_.close();
    }

    net::endpoint local_endpoint() const { return local_endpoint_; }

    void add_peer(net::endpoint peer) {
        std::lock_guard lk(peers_m_);
        peers_.push_back(peer);
    }

    /// Local samples on this topic are fragmented and sent to every peer.
    result<void> export_topic(const topic& t) {
        std::uint32_t hash = topic_hash(t);
        auto sub = local_.create_subscriber(
            t, [this, hash](const bus_sample& s) { send_sample(hash, s); });
        if (!sub) return sub.err();
        exports_.push_back(std::move(*sub));
        return {};
    }

    /// Frames carrying this topic's hash are reassembled and republished.
    result<void> import_topic(const topic& t) {
        std::uint32_t hash = topic_hash(t);
        auto pub = local_.create_publisher(t);
        if (!pub) return pub.err();
        std::lock_guard lk(imports_m_);
        auto [it, fresh] = imports_.try_emplace(hash);
        if (!fresh)
            return error{errc::invalid_config,
                         "topic hash collision on import: " + t.name};
        it->second.pub = std::move(*pub);
        return {};
    }

    udp_link_stats stats() const {
        udp_link_stats out;
        out.sent_frames = sent_frames_;
        out.sent_samples = sent_samples_;
        out.received_frames = received_frames_;
        out.delivered_samples = delivered_samples_;
        out.lost_samples = lost_samples_;
        out.bad_frames = bad_frames_;
        out.oversize_samples = oversize_samples_;
        return out;
    }

private:
    struct import_record {
        publisher pub;
    };

    /// Reassembly of the one in-progress unit per (source, publisher).
    struct assembly {
        std::uint32_t seq = 0;
        std::uint32_t hash = 0;
        std::uint16_t frag_count = 0;
        std::size_t received = 0;
        std::size_t total_size = 0; // known once the last fragment arrives
        std::vector<bool> have;
        byte_vec data;
        bool active = false;
    };

    struct peer_key {
        net::endpoint source;
        std::uint16_t publisher_id;
        auto operator<=>(const peer_key&) const = default;
    };

    void send_sample(std::uint32_t hash, const bus_sample& s) {
        byte_vec unit;
        unit.reserve(sample_prelude_size + s.payload.size());
        {
            byte_writer w(unit);
            w.u64_be(static_cast<std::uint64_t>(s.publish_time));
            w.raw(s.payload);
        }
        std::size_t count = (unit.size() + fragment_chunk - 1) / fragment_chunk;
        if (count == 0) count = 1;
        if (count > 0xFFFF) {
            ++oversize_samples_;
            return;
        }

        std::vector<net::endpoint> peers;
        {
            std::lock_guard lk(peers_m_);
            peers = peers_;
        }

        byte_vec frame;
        frame.reserve(fragment_header_size + fragment_chunk);
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t off = i * fragment_chunk;
            std::size_t len = std::min(fragment_chunk, unit.size() - off);
            frame.clear();
            byte_writer w(frame);
            fragment_header h;
            h.topic_hash = hash;
            h.publisher_id = s.publisher_id;
            h.sample_seq = static_cast<std::uint32_t>(s.sequence);
            h.frag_index = static_cast<std::uint16_t>(i);
            h.frag_count = static_cast<std::uint16_t>(count);
            encode_fragment_header(h, w);
            w.raw(byte_span(unit).subspan(off, len));
            for (const auto& peer : peers) {
                if (socket_.send_to(frame, peer)) ++sent_frames_;
            }
            if (cfg_.pace_every > 0 && (i + 1) % cfg_.pace_every == 0)
                std::this_thread::sleep_for(std::chrono::nanoseconds(cfg_.pace_sleep));
        }
        ++sent_samples_;
    }

    void rx_loop() {
        byte_vec buf(fragment_header_size + fragment_chunk);
        while (running_) {
            auto got = socket_.recv_from(buf);
            if (!got) return; // socket failed; stop() will join us
            if (!*got) continue;
            handle_frame(byte_span(buf).first((*got)->size), (*got)->source);
        }
    }

    void handle_frame(byte_span frame, net::endpoint source) {
        ++received_frames_;
        byte_reader r(frame);
        auto h = decode_fragment_header(r);
        if (!h || h->version != bus_wire_version || h->frag_index >= h->frag_count ||
            h->frag_count == 0) {
            ++bad_frames_;
            return;
        }
        bool known;
        {
            std::lock_guard lk(imports_m_);
            known = imports_.count(h->topic_hash) > 0;
        }
        if (!known) {
            ++bad_frames_;
            return;
        }

        std::size_t len = r.remaining();
        bool last = h->frag_index + 1 == h->frag_count;
        if ((!last && len != fragment_chunk) || (last && len == 0 && h->frag_count > 1) ||
            len > fragment_chunk) {
            ++bad_frames_;
            return;
        }

        auto& asmbl = assemblies_[peer_key{source, h->publisher_id}];
        if (asmbl.active && asmbl.seq != h->sample_seq) {
            // A new unit preempts the old incomplete one. The abandoned unit
            // is counted by the sequence-gap arithmetic on the next delivery,
            // not here, so it is not counted twice.
            std::uint32_t newer = h->sample_seq - asmbl.seq;
            if (newer < 0x80000000u) {
                asmbl.active = false;
            } else {
                ++bad_frames_; // stale fragment of an abandoned unit
                return;
            }
        }
        if (!asmbl.active) {
            asmbl.active = true;
            asmbl.seq = h->sample_seq;
            asmbl.hash = h->topic_hash;
            asmbl.frag_count = h->frag_count;
            asmbl.received = 0;
            asmbl.total_size = 0;
            asmbl.have.assign(h->frag_count, false);
            asmbl.data.resize(static_cast<std::size_t>(h->frag_count) * fragment_chunk);
        }
        if (asmbl.frag_count != h->frag_count || asmbl.hash != h->topic_hash) {
            ++bad_frames_;
            return;
        }
        if (asmbl.have[h->frag_index]) return; // duplicate
        std::memcpy(asmbl.data.data() + std::size_t(h->frag_index) * fragment_chunk,
                    frame.data() + fragment_header_size, len);
        asmbl.have[h->frag_index] = true;
        ++asmbl.received;
        if (last) asmbl.total_size = std::size_t(h->frag_count - 1) * fragment_chunk + len;

        if (asmbl.received == asmbl.frag_count) {
            asmbl.active = false;
            deliver_unit(peer_key{source, h->publisher_id}, asmbl);
        }
    }

    void deliver_unit(peer_key key, assembly& asmbl) {
        // sequence-gap accounting per remote publisher
        auto [it, fresh] = last_seq_seen_.try_emplace(key, asmbl.seq);
        if (!fresh) {
            std::uint32_t gap = asmbl.seq - it->second;
            if (gap >= 1 && gap < 0x80000000u) {
                lost_samples_ += gap - 1;
                it->second = asmbl.seq;
            }
        }

        byte_reader r(byte_span(asmbl.data).first(asmbl.total_size));
        if (!r.can_read(sample_prelude_size)) {
            ++bad_frames_;
            return;
        }
        auto stamp = static_cast<time_point>(r.u64_be());
        byte_span payload = r.raw(r.remaining());

        publisher* pub = nullptr;
        {
            std::lock_guard lk(imports_m_);
            auto imp = imports_.find(asmbl.hash);
            if (imp != imports_.end()) pub = &imp->second.pub;
        }
        if (pub && pub->publish_with_time(payload, stamp)) ++delivered_samples_;
    }

    topic_bus& local_;
    udp_link_config cfg_;
    net::udp_socket socket_;
    net::endpoint local_endpoint_;
    std::atomic<bool> running_{false};
    std::thread rx_thread_;

    std::mutex peers_m_;
    std::vector<net::endpoint> peers_;

    std::vector<subscriber> exports_;
    std::mutex imports_m_;
    std::map<std::uint32_t, import_record> imports_;

    // rx-thread state, no locking needed
    std::map<peer_key, assembly> assemblies_;
    std::map<peer_key, std::uint32_t> last_seq_seen_;

    std::atomic<std::uint64_t> sent_frames_{0}, sent_samples_{0}, received_frames_{0},
        delivered_samples_{0}, lost_samples_{0}, bad_frames_{0}, oversize_samples_{0};
};

} // namespace somebridge::bus

#endif // SOMEBRIDGE_BUS_UDP_LINK_HPP
