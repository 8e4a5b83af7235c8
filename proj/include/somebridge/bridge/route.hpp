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

#ifndef SOMEBRIDGE_BRIDGE_ROUTE_HPP
#define SOMEBRIDGE_BRIDGE_ROUTE_HPP

#include "somebridge/bridge/config.hpp"
#include "somebridge/clock.hpp"
#include "somebridge/someip/sd_endpoint.hpp"

namespace somebridge::bridge {

/// Observer for the conversion checkpoints. The route stamps the monotonic
/// clock immediately before and after each convert() call and hands the span
/// to the sink. Implementations must not allocate or block; they run on the
/// data path.
class trace_sink {
public:
    virtual ~trace_sink() = default;
    virtual void convert_out(std::uint64_t msg_id, time_point t1, time_point t2,
                             std::size_t payload_bytes) noexcept = 0;
    virtual void convert_in(std::uint64_t msg_id, time_point t3, time_point t4,
                            std::size_t payload_bytes) noexcept = 0;
};

struct route_counters {
    std::uint64_t converted = 0;     // successful payload conversions
    std::uint64_t forwarded = 0;     // notifications queued or bus payloads emitted
    std::uint64_t dropped = 0;       // converted with no live receiver, or route paused
    std::uint64_t malformed = 0;     // payload conversion failures
    std::uint64_t wrong_version = 0; // interface_version mismatches
    std::uint64_t ignored = 0;       // traffic for other services or events
};

/// A notification ready to leave through the data socket.
struct data_outbound {
    net::endpoint dest;
    someip::message msg;
};

struct route_event {
    enum class kind : std::uint8_t { forwarding_started, forwarding_paused, fault };
    kind what;
    std::string detail;
};

/// One bridged topic as a sans-IO state machine: service discovery, payload
/// conversion, and counters, with all sockets and bus handles owned by the
/// caller. Single-threaded by contract, like sd_endpoint.
class bridge_route {
public:
    bridge_route(route_config cfg, const schema::schema_registry& reg,
                 trace_sink* sink = nullptr, someip::sd_timings timings = {},
                 std::uint64_t seed = 0x5eed)
        : cfg_(std::move(cfg)),
          reg_(reg),
          schema_(reg.find(cfg_.topic.type_name)),
          sink_(sink),
          sd_(cfg_.dir == schema::direction::bus_to_someip ? someip::sd_role::server
                                                           : someip::sd_role::client,
              timings, seed) {}

    const route_config& config() const { return cfg_; }
    const route_counters& counters() const { return counters_; }
    someip::sd_endpoint& sd() { return sd_; }
    bool forwarding() const { return forwarding_; }

    /// Brings the route up: offers the service (bus side is the sender) or
    /// starts the find (bus side is the receiver). No SD traffic leaves when
    /// the schema cannot be resolved.
    result<void> start(time_point now) {
        if (schema_ == nullptr)
            return {errc::unknown_type, "no schema for " + cfg_.topic.type_name};
        if (cfg_.dir == schema::direction::bus_to_someip)
            return sd_.offer_service(cfg_.key(), cfg_.major_version, cfg_.minor_version,
                                     cfg_.endpoint, now);
        return sd_.find_service(cfg_.key(), cfg_.major_version, now);
    }

    /// Withdraws the offer or the subscription so peers learn of the
    /// shutdown immediately instead of waiting out the TTL.
    void stop(time_point now) {
        if (cfg_.dir == schema::direction::bus_to_someip) {
            (void)sd_.stop_offer(cfg_.key(), now);
        } else {
            (void)sd_.unsubscribe(cfg_.key(), cfg_.eventgroup_id, now);
        }
        forwarding_ = false;
    }

    // ---- data path, bus to SOME/IP ----

    /// One bus sample in. Conversion always runs so measurements stay
    /// comparable; the result is sent to every SD subscriber, or dropped
    /// when there are none. Failures never take the route down.
    void on_bus_sample(const byte_vec& payload, time_point now) {
        if (cfg_.dir != schema::direction::bus_to_someip) return;
        time_point t1 = steady_now();
        auto conv = schema::convert(reg_, *schema_, payload, schema::direction::bus_to_someip);
        time_point t2 = steady_now();
        if (!conv) {
            ++counters_.malformed;
            return;
        }
        ++counters_.converted;
        std::uint16_t session = next_session();
        if (sink_ != nullptr) sink_->convert_out(session, t1, t2, conv->size());

        auto subs = sd_.subscribers(cfg_.key(), cfg_.eventgroup_id, now);
        if (subs.empty()) {
            ++counters_.dropped;
            return;
        }
        auto msg = someip::make_notification(cfg_.service_id, cfg_.event_id,
                                             cfg_.major_version, session, std::move(*conv));
        for (std::size_t i = 0; i + 1 < subs.size(); ++i) {
            data_outbound_.push_back({subs[i], msg});
            ++counters_.forwarded;
        }
        data_outbound_.push_back({subs.back(), std::move(msg)});
        ++counters_.forwarded;
    }

    // ---- data path, SOME/IP to bus ----

    /// One SOME/IP message in. Only this route's notification passes the
    /// filter; the converted payload is queued for the bus publisher.
    void on_someip_message(const someip::message& msg, time_point) {
        if (cfg_.dir != schema::direction::someip_to_bus) return;
        if (msg.header.service_id != cfg_.service_id ||
            msg.header.method_id != cfg_.wire_event_id() ||
            msg.header.type != someip::message_type::notification) {
            ++counters_.ignored;
            return;
        }
        if (msg.header.interface_version != cfg_.major_version) {
            ++counters_.wrong_version;
            return;
        }
        if (!forwarding_) {
            ++counters_.dropped;
            return;
        }
        time_point t3 = steady_now();
        auto conv =
            schema::convert(reg_, *schema_, msg.payload, schema::direction::someip_to_bus);
        time_point t4 = steady_now();
        if (!conv) {
            ++counters_.malformed;
            return;
        }
        ++counters_.converted;
        if (sink_ != nullptr) sink_->convert_in(msg.header.session_id, t3, t4, conv->size());
        bus_outbound_.push_back(std::move(*conv));
        ++counters_.forwarded;
    }

    /// SD traffic from the wire.
    void on_sd_message(const someip::sd_message& msg, net::endpoint source, time_point now) {
        sd_.handle_sd_message(msg, source, now);
        react(now);
    }

    // ---- timers and outputs ----

    std::optional<time_point> next_wakeup() const { return sd_.next_wakeup(); }

    void poll(time_point now) {
        sd_.poll(now);
        react(now);
    }

    std::vector<someip::sd_outbound> take_sd_outbound() { return sd_.take_outbound(); }
    std::vector<data_outbound> take_data_outbound() { return std::exchange(data_outbound_, {}); }
    std::vector<byte_vec> take_bus_outbound() { return std::exchange(bus_outbound_, {}); }
    std::vector<route_event> take_events() { return std::exchange(events_, {}); }

private:
    /// Turns SD events into forwarding-state changes. The client side
    /// re-subscribes whenever the offer is (re)seen, so a peer withdrawal
    /// pauses the route and a re-offer resumes it without outside help.
    void react(time_point now) {
        for (const auto& ev : sd_.take_events()) {
            using k = someip::sd_event::kind;
            switch (ev.what) {
                case k::offer_seen:
                    subscribe(now);
                    break;
                case k::offer_lost:
                    pause("offer lost");
                    break;
                case k::subscribed:
                    if (!forwarding_) {
                        forwarding_ = true;
                        events_.push_back({route_event::kind::forwarding_started, {}});
                    }
                    break;
                case k::subscribe_timeout:
                    pause("subscribe ack timeout");
                    events_.push_back(
                        {route_event::kind::fault, "subscribe attempts exhausted"});
                    subscribe(now); // retry while the offer stays cached
                    break;
                case k::find_timeout:
                    events_.push_back({route_event::kind::fault, "service not discovered"});
                    break;
                default:
                    break; // server-side bookkeeping needs no reaction
            }
        }
    }

    void subscribe(time_point now) {
        if (cfg_.dir != schema::direction::someip_to_bus) return;
        (void)sd_.subscribe_eventgroup(cfg_.key(), cfg_.eventgroup_id, cfg_.endpoint, now);
    }

    void pause(std::string why) {
        if (forwarding_) {
            forwarding_ = false;
            events_.push_back({route_event::kind::forwarding_paused, std::move(why)});
        }
    }

    std::uint16_t next_session() {
        session_ = static_cast<std::uint16_t>(session_ == 0xFFFF ? 1 : session_ + 1);
        return session_;
    }

    route_config cfg_;
    const schema::schema_registry& reg_;
    const schema::message_schema* schema_;
    trace_sink* sink_;
    someip::sd_endpoint sd_;

    bool forwarding_ = false;
    std::uint16_t session_ = 0;
    route_counters counters_;
    std::vector<data_outbound> data_outbound_;
    std::vector<byte_vec> bus_outbound_;
    std::vector<route_event> events_;
};

} // namespace somebridge::bridge

#endif // SOMEBRIDGE_BRIDGE_ROUTE_HPP
