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

#ifndef SOMEBRIDGE_SOMEIP_SD_WIRE_HPP
#define SOMEBRIDGE_SOMEIP_SD_WIRE_HPP

#include <cstdint>
#include <vector>

#include "somebridge/bytes.hpp"
#include "somebridge/core.hpp"
#include "somebridge/net/endpoint.hpp"
#include "somebridge/someip/message.hpp"

namespace somebridge::someip {

/// Service discovery rides inside ordinary SOME/IP messages under these
/// reserved identifiers.
inline constexpr std::uint16_t sd_service_id = 0xFFFF;
inline constexpr std::uint16_t sd_method_id = 0x8100;
inline constexpr std::uint32_t sd_max_ttl = 0xFFFFFF; // 24-bit seconds

struct service_key {
    std::uint16_t service_id = 0;
    std::uint16_t instance_id = 0;

    auto operator<=>(const service_key&) const = default;
};

/// 0xFFFF in a find entry matches any instance of the service.
inline constexpr std::uint16_t any_instance = 0xFFFF;

inline bool key_matches(const service_key& find, const service_key& offer) {
    return find.service_id == offer.service_id &&
           (find.instance_id == any_instance || find.instance_id == offer.instance_id);
}

enum class sd_entry_type : std::uint8_t {
    find_service = 0x00,
    offer_service = 0x01,
    subscribe_eventgroup = 0x06,
    subscribe_eventgroup_ack = 0x07,
};

inline bool known_sd_entry_type(std::uint8_t v) {
    return v == 0x00 || v == 0x01 || v == 0x06 || v == 0x07;
}

inline const char* sd_entry_type_name(sd_entry_type t) {
    switch (t) {
        case sd_entry_type::find_service: return "FIND";
        case sd_entry_type::offer_service: return "OFFER";
        case sd_entry_type::subscribe_eventgroup: return "SUBSCRIBE";
        case sd_entry_type::subscribe_eventgroup_ack: return "SUBSCRIBE_ACK";
    }
    return "?";
}

struct sd_entry {
    sd_entry_type type = sd_entry_type::find_service;
    service_key key;
    std::uint8_t major_version = 0;
    std::uint32_t minor_version = 0; // find/offer only
    std::uint16_t eventgroup_id = 0; // subscribe forms only
    std::uint32_t ttl = 0;           // seconds; 0 withdraws/stops
    /// Offers carry the data endpoint events are sent from; subscribes carry
    /// the endpoint notifications should be delivered to.
    std::optional<net::endpoint> endpoint;

    bool operator==(const sd_entry&) const = default;

    bool is_subscribe_form() const {
        return type == sd_entry_type::subscribe_eventgroup ||
               type == sd_entry_type::subscribe_eventgroup_ack;
    }
};

inline sd_entry make_offer(service_key key, std::uint8_t major, std::uint32_t minor,
                           std::uint32_t ttl, net::endpoint data_endpoint) {
    sd_entry e;
    e.type = sd_entry_type::offer_service;
    e.key = key;
    e.major_version = major;
    e.minor_version = minor;
    e.ttl = ttl;
    e.endpoint = data_endpoint;
    return e;
}

inline sd_entry make_find(service_key key, std::uint8_t major, std::uint32_t ttl) {
    sd_entry e;
    e.type = sd_entry_type::find_service;
    e.key = key;
    e.major_version = major;
    e.ttl = ttl;
    return e;
}

inline sd_entry make_subscribe(service_key key, std::uint8_t major, std::uint16_t eventgroup,
                               std::uint32_t ttl, net::endpoint data_endpoint) {
    sd_entry e;
    e.type = sd_entry_type::subscribe_eventgroup;
    e.key = key;
    e.major_version = major;
    e.eventgroup_id = eventgroup;
    e.ttl = ttl;
    e.endpoint = data_endpoint;
    return e;
}

struct sd_message {
    bool reboot_flag = false;
    std::uint16_t session = 0;
    std::vector<sd_entry> entries;

    bool operator==(const sd_message&) const = default;
};

// Wire layout (documented in docs/wire-format.md):
//   head   8B: flags u8 (bit7 reboot) | reserved u8 | session u16 |
//              entries_len u32 (bytes)
//   entry 20B: type u8 | option_index u8 (0xFF = none) | service u16 |
//              instance u16 | major u8 | ttl u24 | minor u32 |
//              eventgroup u16 | counter u16 | reserved u16
//   then options_len u32 (bytes), options 16B each:
//              type u8 (0x04 ipv4/udp) | reserved u8 | body_len u16 (=12) |
//              ipv4 u32 | port u16 | l4proto u8 (0x11) | reserved u8 |
//              reserved u32

inline constexpr std::size_t sd_head_size = 8;
inline constexpr std::size_t sd_entry_size = 20;
inline constexpr std::size_t sd_option_size = 16;
inline constexpr std::uint8_t sd_option_ipv4_udp = 0x04;
inline constexpr std::uint8_t sd_l4_udp = 0x11;

inline result<byte_vec> encode_sd(const sd_message& m) {
    if (m.entries.size() > 0xFF)
        return {errc::malformed_entry, "too many entries for one SD message"};

    std::vector<net::endpoint> options;
    std::vector<std::uint8_t> option_index(m.entries.size(), 0xFF);
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        const auto& e = m.entries[i];
        if (e.ttl > sd_max_ttl)
            return {errc::malformed_entry, "ttl exceeds 24-bit range"};
        if (!e.endpoint) continue;
        std::size_t at = options.size();
        for (std::size_t j = 0; j < options.size(); ++j)
            if (options[j] == *e.endpoint) at = j;
        if (at == options.size()) {
            if (at == 0xFF) return {errc::malformed_entry, "too many endpoint options"};
            options.push_back(*e.endpoint);
        }
        option_index[i] = static_cast<std::uint8_t>(at);
    }

    byte_vec out;
    out.reserve(sd_head_size + m.entries.size() * sd_entry_size + 4 +
                options.size() * sd_option_size);
    byte_writer w{out};
    w.u8(m.reboot_flag ? 0x80 : 0x00);
    w.u8(0);
    w.u16_be(m.session);
    w.u32_be(static_cast<std::uint32_t>(m.entries.size() * sd_entry_size));
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        const auto& e = m.entries[i];
        w.u8(static_cast<std::uint8_t>(e.type));
        w.u8(option_index[i]);
        w.u16_be(e.key.service_id);
        w.u16_be(e.key.instance_id);
        w.u8(e.major_version);
        w.u24_be(e.ttl);
        w.u32_be(e.minor_version);
        w.u16_be(e.eventgroup_id);
        w.u16_be(0); // counter
        w.u16_be(0); // reserved
    }
    w.u32_be(static_cast<std::uint32_t>(options.size() * sd_option_size));
    for (const auto& ep : options) {
        w.u8(sd_option_ipv4_udp);
        w.u8(0);
        w.u16_be(12);
        w.u32_be(ep.ipv4);
        w.u16_be(ep.port);
        w.u8(sd_l4_udp);
        w.u8(0);
        w.u32_be(0);
    }
    return out;
}

struct sd_decode_result {
    sd_message msg;
    /// Entries skipped because of an unknown type code or a dangling option
    /// reference. Never fatal.
    std::size_t malformed_entries = 0;
};

inline result<sd_decode_result> decode_sd(byte_span payload) {
    if (payload.size() < sd_head_size + 4)
        return {errc::malformed_entry, "SD payload shorter than fixed head"};
    byte_reader r{payload};
    sd_decode_result out;
    const std::uint8_t flags = r.u8();
    out.msg.reboot_flag = (flags & 0x80) != 0;
    r.skip(1);
    out.msg.session = r.u16_be();
    const std::uint32_t entries_len = r.u32_be();
    if (entries_len % sd_entry_size != 0)
        return {errc::malformed_entry, "entries length not a multiple of entry size"};
    if (!r.can_read(entries_len + 4))
        return {errc::malformed_entry, "entries length exceeds payload"};

    struct raw_entry {
        sd_entry entry;
        std::uint8_t option_index;
        bool valid;
    };
    std::vector<raw_entry> raws;
    raws.reserve(entries_len / sd_entry_size);
    for (std::uint32_t i = 0; i < entries_len / sd_entry_size; ++i) {
        raw_entry re{};
        const std::uint8_t type_raw = r.u8();
        re.option_index = r.u8();
        re.entry.key.service_id = r.u16_be();
        re.entry.key.instance_id = r.u16_be();
        re.entry.major_version = r.u8();
        re.entry.ttl = r.u24_be();
        re.entry.minor_version = r.u32_be();
        re.entry.eventgroup_id = r.u16_be();
        r.skip(4); // counter + reserved
        re.valid = known_sd_entry_type(type_raw);
        if (re.valid) re.entry.type = static_cast<sd_entry_type>(type_raw);
        raws.push_back(re);
    }

    const std::uint32_t options_len = r.u32_be();
    if (options_len % sd_option_size != 0)
        return {errc::malformed_entry, "options length not a multiple of option size"};
    if (!r.can_read(options_len))
        return {errc::malformed_entry, "options length exceeds payload"};
    std::vector<std::optional<net::endpoint>> options;
    for (std::uint32_t i = 0; i < options_len / sd_option_size; ++i) {
        const std::uint8_t type = r.u8();
        r.skip(3);
        net::endpoint ep;
        ep.ipv4 = r.u32_be();
        ep.port = r.u16_be();
        r.skip(6);
        if (type == sd_option_ipv4_udp)
            options.emplace_back(ep);
        else
            options.emplace_back(std::nullopt); // unknown option kind
    }

    for (auto& re : raws) {
        if (!re.valid) {
            ++out.malformed_entries;
            continue;
        }
        if (re.option_index != 0xFF) {
            if (re.option_index >= options.size() || !options[re.option_index]) {
                ++out.malformed_entries;
                continue;
            }
            re.entry.endpoint = *options[re.option_index];
        }
        out.msg.entries.push_back(std::move(re.entry));
    }
    return out;
}

/// Wraps an SD payload in its SOME/IP carrier message. The SD session
/// counter doubles as the header session id.
inline result<byte_vec> encode_sd_frame(const sd_message& m) {
    auto payload = encode_sd(m);
    if (!payload) return payload.err();
    message carrier;
    carrier.header.service_id = sd_service_id;
    carrier.header.method_id = sd_method_id;
    carrier.header.length = static_cast<std::uint32_t>(length_tail + payload->size());
    carrier.header.session_id = m.session;
    carrier.header.interface_version = 1;
    carrier.header.type = message_type::notification;
    carrier.payload = std::move(*payload);
    return encode_message(carrier);
}

inline bool is_sd_message(const message& m) {
    return m.header.service_id == sd_service_id && m.header.method_id == sd_method_id;
}

} // namespace somebridge::someip

#endif // SOMEBRIDGE_SOMEIP_SD_WIRE_HPP
