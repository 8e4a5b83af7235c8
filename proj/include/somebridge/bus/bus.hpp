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

#ifndef SOMEBRIDGE_BUS_BUS_HPP
#define SOMEBRIDGE_BUS_BUS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "somebridge/bytes.hpp"
#include "somebridge/clock.hpp"
#include "somebridge/core.hpp"

namespace somebridge::bus {

/// Topics pair a name with the schema identifier of the payloads they carry.
/// Matching is by name; a name reused with a different type is a fault.
struct topic {
    std::string name;
    std::string type_name;
    bool operator==(const topic&) const = default;
};

struct bus_sample {
    std::string topic_name;
    std::uint16_t publisher_id = 0;
    std::uint64_t sequence = 0;      // strictly increasing per publisher
    time_point publish_time = 0;     // monotonic nanoseconds at the origin
    byte_vec payload;                // bus encoding
};

using subscriber_callback = std::function<void(const bus_sample&)>;

class publisher;
class subscriber;

/// Anonymous publish/subscribe bus. Senders never address receivers; the bus
/// matches on topic name and delivers to whoever is subscribed right now
/// (volatile durability: late joiners see only later samples).
///
/// Thread safety: publish may be called from any number of threads. Each
/// subscriber's callback runs under its own dispatch lock, so one callback is
/// never invoked concurrently with itself. Callbacks may publish to other
/// topics but must not form publish cycles back to their own topic.
class topic_bus {
public:
    topic_bus() : core_(std::make_shared<core>()) {}

    result<publisher> create_publisher(const topic& t);
    result<subscriber> create_subscriber(const topic& t, subscriber_callback cb);

    /// Publishing after close fails with BusClosed; subscribers are dropped.
    void close() {
        std::vector<std::shared_ptr<sub_state>> subs;
        {
            std::lock_guard lk(core_->m);
            core_->closed = true;
            for (auto& [name, rec] : core_->topics) {
                for (auto& s : rec.subs) subs.push_back(s);
                rec.subs.clear();
            }
        }
        for (auto& s : subs) {
            std::lock_guard dispatch(s->dispatch); // drain in-flight callbacks
            s->alive = false;
        }
    }

    bool closed() const {
        std::lock_guard lk(core_->m);
        return core_->closed;
    }

private:
    friend class publisher;
    friend class subscriber;

    struct sub_state {
        std::uint64_t id = 0;
        std::string topic_name;
        std::mutex dispatch;
        subscriber_callback cb;
        bool alive = true; // guarded by dispatch
    };

    struct topic_record {
        std::string type_name;
        std::vector<std::shared_ptr<sub_state>> subs;
    };

    struct core {
        mutable std::mutex m;
        bool closed = false;
        std::map<std::string, topic_record, std::less<>> topics;
        std::uint16_t next_publisher_id = 1;
        std::uint64_t next_subscriber_id = 1;
    };

    result<topic_record*> topic_for(const topic& t) {
        if (t.name.empty()) return error{errc::invalid_config, "topic name is empty"};
        auto [it, fresh] = core_->topics.try_emplace(t.name);
        if (fresh) {
            it->second.type_name = t.type_name;
        } else if (it->second.type_name != t.type_name) {
            return error{errc::type_mismatch,
                         "topic '" + t.name + "' is " + it->second.type_name + ", not " +
                             t.type_name};
        }
        return &it->second;
    }

    std::shared_ptr<core> core_;
};

/// Move-only handle; publishing assigns the per-publisher sequence number.
class publisher {
public:
    publisher() = default;
    publisher(publisher&&) = default;
    publisher& operator=(publisher&&) = default;

    const topic& topic_of() const { return topic_; }
    std::uint16_t id() const { return id_; }
    bool valid() const { return core_ != nullptr; }

    /// Publishes with the current monotonic timestamp.
    result<std::uint64_t> publish(byte_span payload) {
        return publish_with_time(payload, steady_now());
    }

    /// Publishes preserving an origin timestamp (used when relaying samples
    /// that already carry one).
    result<std::uint64_t> publish_with_time(byte_span payload, time_point stamp) {
        if (!core_) return error{errc::bus_closed, "publisher not attached"};
        std::lock_guard order(*order_); // per-publisher FIFO

        std::vector<std::shared_ptr<topic_bus::sub_state>> subs;
        std::uint64_t seq;
        {
            std::lock_guard lk(core_->m);
            if (core_->closed) return error{errc::bus_closed, "bus is closed"};
            seq = ++last_seq_;
            auto it = core_->topics.find(topic_.name);
            if (it != core_->topics.end()) subs = it->second.subs;
        }

        bus_sample sample;
        sample.topic_name = topic_.name;
        sample.publisher_id = id_;
        sample.sequence = seq;
        sample.publish_time = stamp;
        sample.payload.assign(payload.begin(), payload.end());

        for (auto& s : subs) {
            std::lock_guard dispatch(s->dispatch);
            if (s->alive && s->cb) s->cb(sample);
        }
        return seq;
    }

private:
    friend class topic_bus;
    publisher(std::shared_ptr<topic_bus::core> core, topic t, std::uint16_t id)
        : core_(std::move(core)), topic_(std::move(t)), id_(id),
          order_(std::make_unique<std::mutex>()) {}

    std::shared_ptr<topic_bus::core> core_;
    topic topic_;
    std::uint16_t id_ = 0;
    std::uint64_t last_seq_ = 0;
    std::unique_ptr<std::mutex> order_;
};

/// Move-only handle; destruction unsubscribes and waits out any callback
/// running at that moment.
class subscriber {
public:
    subscriber() = default;
    subscriber(subscriber&&) = default;
    subscriber& operator=(subscriber&& o) noexcept {
        if (this != &o) {
            detach();
            core_ = std::move(o.core_);
            state_ = std::move(o.state_);
        }
        return *this;
    }
    ~subscriber() { detach(); }

    bool valid() const { return state_ != nullptr; }
    const std::string& topic_name() const { return state_->topic_name; }

private:
    friend class topic_bus;
    subscriber(std::shared_ptr<topic_bus::core> core,
               std::shared_ptr<topic_bus::sub_state> state)
        : core_(std::move(core)), state_(std::move(state)) {}

    void detach() {
        if (!state_) return;
        {
            std::lock_guard lk(core_->m);
            auto it = core_->topics.find(state_->topic_name);
            if (it != core_->topics.end()) {
                auto& subs = it->second.subs;
                std::erase_if(subs, [&](const auto& s) { return s->id == state_->id; });
            }
        }
        {
            std::lock_guard dispatch(state_->dispatch);
            state_->alive = false;
        }
        state_.reset();
        core_.reset();
    }

    std::shared_ptr<topic_bus::core> core_;
    std::shared_ptr<topic_bus::sub_state> state_;
};

inline result<publisher> topic_bus::create_publisher(const topic& t) {
    std::lock_guard lk(core_->m);
    if (core_->closed) return error{errc::bus_closed, "bus is closed"};
    auto rec = topic_for(t);
    if (!rec) return rec.err();
    return publisher(core_, t, core_->next_publisher_id++);
}

inline result<subscriber> topic_bus::create_subscriber(const topic& t,
                                                       subscriber_callback cb) {
    std::lock_guard lk(core_->m);
    if (core_->closed) return error{errc::bus_closed, "bus is closed"};
    auto rec = topic_for(t);
    if (!rec) return rec.err();
    auto state = std::make_shared<sub_state>();
    state->id = core_->next_subscriber_id++;
    state->topic_name = t.name;
    state->cb = std::move(cb);
    (*rec)->subs.push_back(state);
    return subscriber(core_, std::move(state));
}

} // namespace somebridge::bus

#endif // SOMEBRIDGE_BUS_BUS_HPP
