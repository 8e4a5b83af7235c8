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

#ifndef SOMEBRIDGE_SOMEIP_SD_ENDPOINT_HPP
#define SOMEBRIDGE_SOMEIP_SD_ENDPOINT_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "somebridge/clock.hpp"
#include "somebridge/core.hpp"
#include "somebridge/net/endpoint.hpp"
#include "somebridge/someip/sd_wire.hpp"

namespace somebridge::someip {

/// All phases are driven by an injected clock; defaults keep announce storms
/// civil while staying fast enough for loopback bring-up.
struct sd_timings {
    duration_ns initial_delay_min = ms(10);
    duration_ns initial_delay_max = ms(100);
    int repetition_count = 3;
    duration_ns repetition_base = ms(200);
    duration_ns cyclic_offer_period = seconds(1);
    int find_retries = 3;
    duration_ns find_interval = ms(500);
    int subscribe_attempts = 3;
    duration_ns subscribe_ack_timeout = ms(500);
    std::uint32_t offer_ttl_sec = 3;
    std::uint32_t subscribe_ttl_sec = 3;

    /// Scaled down for live in-process runs where real milliseconds matter.
    static sd_timings fast() {
        sd_timings t;
        t.initial_delay_min = ms(1);
        t.initial_delay_max = ms(5);
        t.repetition_base = ms(10);
        t.cyclic_offer_period = ms(200);
        t.find_interval = ms(20);
        t.subscribe_ack_timeout = ms(50);
        return t;
    }
};

enum class sd_role : std::uint8_t { server, client };

enum class server_phase : std::uint8_t { down, initial, repetition, main };
enum class client_phase : std::uint8_t { down, searching, service_known, subscribed };

struct sd_event {
    enum class kind : std::uint8_t {
        offer_seen,         // client: a matching offer became available
        offer_lost,         // client: offer expired or was withdrawn
        subscribed,         // client: eventgroup ack received
        subscribe_timeout,  // client: ack attempts exhausted
        find_timeout,       // client: find retries exhausted (still listening)
        subscriber_added,   // server: new eventgroup subscriber
        subscriber_removed, // server: subscriber sent ttl=0
        subscriber_expired, // server: subscription ttl lapsed
    };
    kind what;
    service_key key;
    std::uint16_t eventgroup_id = 0;
    net::endpoint peer; // data endpoint of the peer where applicable
};

struct sd_outbound {
    /// Multicast messages go to the configured SD group (or every known peer
    /// in loopback mode); the state machine only distinguishes the two.
    bool multicast = false;
    net::endpoint dest; // valid when !multicast
    sd_message msg;
};

struct offer_record {
    service_key key;
    std::uint8_t major_version = 0;
    std::uint32_t minor_version = 0;
    net::endpoint data_endpoint;
    net::endpoint sd_source;
    time_point expires = 0;
};

struct sd_counters {
    std::uint64_t sent_messages = 0;
    std::uint64_t received_entries = 0;
    std::uint64_t malformed_entries = 0;
    std::uint64_t ignored_entries = 0;
};

/// One service-discovery participant. Single-threaded by contract: packets,
/// timer polls, and commands must arrive sequentially from one executor.
class sd_endpoint {
public:
    explicit sd_endpoint(sd_role role, sd_timings timings = {}, std::uint64_t seed = 0x5d5eed)
        : role_(role), timings_(timings), rng_(seed) {}

    sd_role role() const { return role_; }
    const sd_counters& counters() const { return counters_; }
    void note_malformed(std::size_t n) { counters_.malformed_entries += n; }

    // ---- server commands ----

    result<void> offer_service(service_key key, std::uint8_t major, std::uint32_t minor,
                               net::endpoint data_endpoint, time_point now) {
        if (role_ != sd_role::server)
            return {errc::invalid_config, "offer_service requires the server role"};
        if (key.instance_id == any_instance)
            return {errc::invalid_id, "0xFFFF is reserved for finds"};
        if (offered_.count(key))
            return {errc::already_offered, "service already offered"};
        offered_service s;
        s.major = major;
        s.minor = minor;
        s.data_endpoint = data_endpoint;
        s.phase = server_phase::initial;
        s.next_announce =
            now + std::uniform_int_distribution<duration_ns>(timings_.initial_delay_min,
                                                             timings_.initial_delay_max)(rng_);
        offered_.emplace(key, s);
        return {};
    }

    result<void> stop_offer(service_key key, time_point now) {
        auto it = offered_.find(key);
        if (it == offered_.end())
            return {errc::not_discovered, "service not offered"};
        emit_offer(key, it->second, /*ttl=*/0, /*multicast=*/true, {}, now);
        offered_.erase(it);
        for (auto sub = subscriptions_.begin(); sub != subscriptions_.end();)
            sub = (sub->first.key == key) ? subscriptions_.erase(sub) : std::next(sub);
        return {};
    }

    // ---- client commands ----

    result<void> find_service(service_key key, std::uint8_t major, time_point now) {
        if (role_ != sd_role::client)
            return {errc::invalid_config, "find_service requires the client role"};
        auto& req = requests_[key];
        req.want = key;
        req.major = major;
        if (auto offer = lookup_offer(key, now)) {
            req.phase = client_phase::service_known;
            req.matched = offer->key;
            return {};
        }
        req.phase = client_phase::searching;
        req.matched.reset();
        req.finds_sent = 0;
        req.find_timeout_fired = false;
        req.next_find = now; // first find goes out on the next poll
        return {};
    }

    result<void> subscribe_eventgroup(service_key key, std::uint16_t eventgroup,
                                      net::endpoint data_endpoint, time_point now) {
        if (role_ != sd_role::client)
            return {errc::invalid_config, "subscribe_eventgroup requires the client role"};
        auto it = requests_.find(key);
        if (it == requests_.end() || it->second.phase == client_phase::searching ||
            it->second.phase == client_phase::down || !it->second.matched)
            return {errc::not_discovered, "no cached offer for service"};
        auto& req = it->second;
        req.eventgroup = eventgroup;
        req.data_endpoint = data_endpoint;
        req.sub_attempts = 0;
        req.ack_pending = true;
        send_subscribe(req, timings_.subscribe_ttl_sec, now);
        return {};
    }

    result<void> unsubscribe(service_key key, std::uint16_t eventgroup, time_point now) {
        auto it = requests_.find(key);
        if (it == requests_.end())
            return {errc::not_discovered, "service was never requested"};
        auto& req = it->second;
        if (req.matched && (req.phase == client_phase::subscribed || req.ack_pending)) {
            req.eventgroup = eventgroup;
            send_subscribe(req, /*ttl=*/0, now);
        }
        req.ack_pending = false;
        if (req.phase == client_phase::subscribed) req.phase = client_phase::service_known;
        return {};
    }

    // ---- inputs ----

    void handle_sd_message(const sd_message& msg, net::endpoint source, time_point now) {
        for (const auto& entry : msg.entries) {
            ++counters_.received_entries;
            switch (entry.type) {
                case sd_entry_type::offer_service: on_offer(entry, source, now); break;
                case sd_entry_type::find_service: on_find(entry, source, now); break;
                case sd_entry_type::subscribe_eventgroup: on_subscribe(entry, source, now); break;
                case sd_entry_type::subscribe_eventgroup_ack: on_ack(entry, now); break;
            }
        }
    }

    // ---- time ----

    std::optional<time_point> next_wakeup() const {
        std::optional<time_point> t;
        auto consider = [&](time_point candidate) {
            if (!t || candidate < *t) t = candidate;
        };
        for (const auto& [key, s] : offered_) consider(s.next_announce);
        for (const auto& [key, req] : requests_) {
            if (req.phase == client_phase::searching && !req.find_timeout_fired)
                consider(req.next_find);
            if (req.ack_pending) consider(req.ack_deadline);
            if (req.phase == client_phase::subscribed && !req.ack_pending)
                consider(req.renew_at);
        }
        for (const auto& [key, offer] : known_offers_) consider(offer.expires);
        for (const auto& [key, subs] : subscriptions_)
            for (const auto& [ep, expires] : subs) consider(expires);
        return t;
    }

    void poll(time_point now) {
        // server announcements
        for (auto& [key, s] : offered_) {
            while (s.next_announce <= now) {
                emit_offer(key, s, timings_.offer_ttl_sec, /*multicast=*/true, {}, now);
                switch (s.phase) {
                    case server_phase::initial:
                        s.phase = server_phase::repetition;
                        s.reps_sent = 0;
                        s.next_announce += timings_.repetition_base;
                        break;
                    case server_phase::repetition:
                        ++s.reps_sent;
                        if (s.reps_sent >= timings_.repetition_count) {
                            s.phase = server_phase::main;
                            s.next_announce += timings_.cyclic_offer_period;
                        } else {
                            s.next_announce += timings_.repetition_base << s.reps_sent;
                        }
                        break;
                    case server_phase::main:
                        s.next_announce += timings_.cyclic_offer_period;
                        break;
                    case server_phase::down: s.next_announce = now + 1; break;
                }
            }
        }

        // client find schedule
        for (auto& [key, req] : requests_) {
            if (req.phase != client_phase::searching) continue;
            while (req.finds_sent < timings_.find_retries && req.next_find <= now) {
                sd_message m = next_message();
                m.entries.push_back(make_find(req.want, req.major, timings_.offer_ttl_sec));
                queue(sd_outbound{true, {}, std::move(m)});
                ++req.finds_sent;
                req.next_find += timings_.find_interval;
            }
            // the timeout fires one quiet interval after the last find
            if (req.finds_sent >= timings_.find_retries && !req.find_timeout_fired &&
                req.next_find <= now) {
                req.find_timeout_fired = true;
                events_.push_back({sd_event::kind::find_timeout, req.want, 0, {}});
            }
        }

        // subscribe retries and renewals
        for (auto& [key, req] : requests_) {
            if (req.ack_pending && req.ack_deadline <= now) {
                if (req.sub_attempts >= timings_.subscribe_attempts) {
                    req.ack_pending = false;
                    if (req.phase == client_phase::subscribed)
                        req.phase = client_phase::service_known;
                    events_.push_back(
                        {sd_event::kind::subscribe_timeout, req.want, req.eventgroup, {}});
                } else {
                    send_subscribe(req, timings_.subscribe_ttl_sec, now);
                }
            }
            if (req.phase == client_phase::subscribed && !req.ack_pending &&
                req.renew_at <= now) {
                req.sub_attempts = 0;
                req.ack_pending = true;
                send_subscribe(req, timings_.subscribe_ttl_sec, now);
            }
        }

        // offer expiry
        for (auto it = known_offers_.begin(); it != known_offers_.end();) {
            if (it->second.expires <= now) {
                service_key gone = it->first;
                it = known_offers_.erase(it);
                on_offer_gone(gone, now);
            } else {
                ++it;
            }
        }

        // server-side subscription expiry
        for (auto& [skey, subs] : subscriptions_) {
            for (auto it = subs.begin(); it != subs.end();) {
                if (it->second <= now) {
                    events_.push_back({sd_event::kind::subscriber_expired, skey.key,
                                       skey.eventgroup, it->first});
                    it = subs.erase(it);
                } else {
                    ++it;
                }
            }
        }
    }

    // ---- outputs ----

    std::vector<sd_outbound> take_outbound() { return std::exchange(outbound_, {}); }
    std::vector<sd_event> take_events() { return std::exchange(events_, {}); }

    // ---- queries ----

    server_phase offered_phase(service_key key) const {
        auto it = offered_.find(key);
        return it == offered_.end() ? server_phase::down : it->second.phase;
    }

    client_phase request_phase(service_key key) const {
        auto it = requests_.find(key);
        return it == requests_.end() ? client_phase::down : it->second.phase;
    }

    /// Unexpired offer matching the key (0xFFFF instance matches any).
    std::optional<offer_record> lookup_offer(service_key key, time_point now) const {
        for (const auto& [k, offer] : known_offers_)
            if (key_matches(key, k) && offer.expires > now) return offer;
        return std::nullopt;
    }

    /// Unexpired subscriber data endpoints for one eventgroup.
    std::vector<net::endpoint> subscribers(service_key key, std::uint16_t eventgroup,
                                           time_point now) const {
        std::vector<net::endpoint> out;
        auto it = subscriptions_.find({key, eventgroup});
        if (it == subscriptions_.end()) return out;
        for (const auto& [ep, expires] : it->second)
            if (expires > now) out.push_back(ep);
        return out;
    }

private:
    struct offered_service {
        std::uint8_t major = 0;
        std::uint32_t minor = 0;
        net::endpoint data_endpoint;
        server_phase phase = server_phase::down;
        int reps_sent = 0;
        time_point next_announce = 0;
    };

    struct subscription_key {
        service_key key;
        std::uint16_t eventgroup;
        auto operator<=>(const subscription_key&) const = default;
    };

    struct client_request {
        service_key want; // instance may be 0xFFFF
        std::uint8_t major = 0;
        client_phase phase = client_phase::down;
        std::optional<service_key> matched;
        int finds_sent = 0;
        bool find_timeout_fired = false;
        time_point next_find = 0;
        // subscription
        std::uint16_t eventgroup = 0;
        net::endpoint data_endpoint;
        bool ack_pending = false;
        int sub_attempts = 0;
        time_point ack_deadline = 0;
        time_point renew_at = 0;
    };

    sd_message next_message() {
        sd_message m;
        m.reboot_flag = !first_message_sent_;
        first_message_sent_ = true;
        session_ = (session_ == 0xFFFF) ? 1 : static_cast<std::uint16_t>(session_ + 1);
        m.session = session_;
        return m;
    }

    void queue(sd_outbound out) {
        ++counters_.sent_messages;
        outbound_.push_back(std::move(out));
    }

    void emit_offer(service_key key, const offered_service& s, std::uint32_t ttl,
                    bool multicast, net::endpoint dest, time_point) {
        sd_message m = next_message();
        m.entries.push_back(make_offer(key, s.major, s.minor, ttl, s.data_endpoint));
        queue(sd_outbound{multicast, dest, std::move(m)});
    }

    void send_subscribe(client_request& req, std::uint32_t ttl, time_point now) {
        auto offer_it = req.matched ? known_offers_.find(*req.matched) : known_offers_.end();
        if (offer_it == known_offers_.end()) {
            req.ack_pending = false; // no reachable peer, ack can never arrive
            return;
        }
        sd_message m = next_message();
        m.entries.push_back(make_subscribe(*req.matched, req.major, req.eventgroup, ttl,
                                           req.data_endpoint));
        queue(sd_outbound{false, offer_it->second.sd_source, std::move(m)});
        if (ttl > 0) {
            ++req.sub_attempts;
            req.ack_deadline = now + timings_.subscribe_ack_timeout;
        }
    }

    void on_offer(const sd_entry& entry, net::endpoint source, time_point now) {
        if (role_ != sd_role::client) {
            ++counters_.ignored_entries;
            return;
        }
        if (entry.ttl == 0) {
            known_offers_.erase(entry.key);
            on_offer_gone(entry.key, now);
            return;
        }
        if (!entry.endpoint) {
            ++counters_.malformed_entries; // offers must name a data endpoint
            return;
        }
        offer_record rec;
        rec.key = entry.key;
        rec.major_version = entry.major_version;
        rec.minor_version = entry.minor_version;
        rec.data_endpoint = *entry.endpoint;
        rec.sd_source = source;
        rec.expires = now + seconds(entry.ttl);
        known_offers_[entry.key] = rec;

        for (auto& [key, req] : requests_) {
            if (!key_matches(req.want, entry.key)) continue;
            if (req.phase == client_phase::searching) {
                req.phase = client_phase::service_known;
                req.matched = entry.key;
                events_.push_back(
                    {sd_event::kind::offer_seen, entry.key, 0, rec.data_endpoint});
            }
        }
    }

    void on_offer_gone(service_key key, time_point now) {
        for (auto& [k, req] : requests_) {
            if (!req.matched || *req.matched != key) continue;
            bool was_active = req.phase == client_phase::subscribed ||
                              req.phase == client_phase::service_known;
            req.matched.reset();
            req.ack_pending = false;
            req.phase = client_phase::searching;
            req.finds_sent = 0;
            req.find_timeout_fired = false;
            req.next_find = now; // re-find on the next poll
            if (was_active)
                events_.push_back({sd_event::kind::offer_lost, key, req.eventgroup, {}});
        }
    }

    void on_find(const sd_entry& entry, net::endpoint source, time_point now) {
        if (role_ != sd_role::server) {
            ++counters_.ignored_entries;
            return;
        }
        for (auto& [key, s] : offered_)
            if (key_matches(entry.key, key))
                emit_offer(key, s, timings_.offer_ttl_sec, /*multicast=*/false, source, now);
    }

    void on_subscribe(const sd_entry& entry, net::endpoint source, time_point now) {
        if (role_ != sd_role::server) {
            ++counters_.ignored_entries;
            return;
        }
        auto it = offered_.find(entry.key);
        if (it == offered_.end()) {
            ++counters_.ignored_entries;
            return;
        }
        if (entry.ttl == 0) {
            if (entry.endpoint) {
                auto& subs = subscriptions_[{entry.key, entry.eventgroup_id}];
                if (subs.erase(*entry.endpoint) > 0)
                    events_.push_back({sd_event::kind::subscriber_removed, entry.key,
                                       entry.eventgroup_id, *entry.endpoint});
            }
            return;
        }
        if (!entry.endpoint) {
            ++counters_.malformed_entries; // subscribes must name the data sink
            return;
        }
        auto& subs = subscriptions_[{entry.key, entry.eventgroup_id}];
        bool fresh = subs.find(*entry.endpoint) == subs.end();
        subs[*entry.endpoint] = now + seconds(entry.ttl);
        if (fresh)
            events_.push_back({sd_event::kind::subscriber_added, entry.key,
                               entry.eventgroup_id, *entry.endpoint});

        sd_message ack = next_message();
        sd_entry e;
        e.type = sd_entry_type::subscribe_eventgroup_ack;
        e.key = entry.key;
        e.major_version = entry.major_version;
        e.eventgroup_id = entry.eventgroup_id;
        e.ttl = entry.ttl;
        ack.entries.push_back(e);
        queue(sd_outbound{false, source, std::move(ack)});
    }

    void on_ack(const sd_entry& entry, time_point now) {
        if (role_ != sd_role::client) {
            ++counters_.ignored_entries;
            return;
        }
        for (auto& [key, req] : requests_) {
            if (!req.matched || *req.matched != entry.key) continue;
            if (req.eventgroup != entry.eventgroup_id || !req.ack_pending) continue;
            req.ack_pending = false;
            req.phase = client_phase::subscribed;
            // renew at 80% of the granted ttl
            req.renew_at = now + seconds(entry.ttl) * 8 / 10;
            events_.push_back({sd_event::kind::subscribed, req.want, req.eventgroup, {}});
        }
    }

    sd_role role_;
    sd_timings timings_;
    std::mt19937_64 rng_;
    std::uint16_t session_ = 0;
    bool first_message_sent_ = false;
    sd_counters counters_;

    std::map<service_key, offered_service> offered_;
    std::map<subscription_key, std::map<net::endpoint, time_point>> subscriptions_;
    std::map<service_key, client_request> requests_;
    std::map<service_key, offer_record> known_offers_;

    std::vector<sd_outbound> outbound_;
    std::vector<sd_event> events_;
};

} // namespace somebridge::someip

#endif // SOMEBRIDGE_SOMEIP_SD_ENDPOINT_HPP
