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

#ifndef SOMEBRIDGE_SOMEIP_MESSAGE_HPP
#define SOMEBRIDGE_SOMEIP_MESSAGE_HPP

#include <cstdint>
#include <map>
#include <string>

#include "somebridge/bytes.hpp"
#include "somebridge/core.hpp"

namespace somebridge::someip {

enum class message_type : std::uint8_t {
    request = 0x00,
    request_no_return = 0x01,
    notification = 0x02,
    response = 0x80,
    error = 0x81,
};

enum class return_code : std::uint8_t {
    ok = 0x00,
    not_ok = 0x01,
    unknown_service = 0x02,
    wrong_protocol_version = 0x07,
    wrong_interface_version = 0x08,
};

inline constexpr std::uint8_t protocol_version_v1 = 0x01;
inline constexpr std::uint16_t event_id_flag = 0x8000;
inline constexpr std::size_t header_size = 16;
// The length field covers client_id through return_code plus the payload.
inline constexpr std::uint32_t length_tail = 8;

inline const char* message_type_name(message_type t) {
    switch (t) {
        case message_type::request: return "REQUEST";
        case message_type::request_no_return: return "REQUEST_NO_RETURN";
        case message_type::notification: return "NOTIFICATION";
        case message_type::response: return "RESPONSE";
        case message_type::error: return "ERROR";
    }
    return "?";
}

inline const char* return_code_name(return_code c) {
    switch (c) {
        case return_code::ok: return "OK";
        case return_code::not_ok: return "NOT_OK";
        case return_code::unknown_service: return "UNKNOWN_SERVICE";
        case return_code::wrong_protocol_version: return "WRONG_PROTOCOL_VERSION";
        case return_code::wrong_interface_version: return "WRONG_INTERFACE_VERSION";
    }
    return "?";
}

inline bool known_message_type(std::uint8_t v) {
    return v == 0x00 || v == 0x01 || v == 0x02 || v == 0x80 || v == 0x81;
}

inline bool known_return_code(std::uint8_t v) {
    return v <= 0x02 || v == 0x07 || v == 0x08;
}

struct header {
    std::uint16_t service_id = 0;
    std::uint16_t method_id = 0;
    std::uint32_t length = length_tail;
    std::uint16_t client_id = 0;
    std::uint16_t session_id = 0;
    std::uint8_t protocol_version = protocol_version_v1;
    std::uint8_t interface_version = 0;
    message_type type = message_type::request;
    return_code code = return_code::ok;

    bool operator==(const header&) const = default;
};

struct message {
    someip::header header;
    byte_vec payload;

    bool operator==(const message&) const = default;
};

/// Makes a notification message with a consistent length field. The event id
/// is carried in the method field with bit 15 forced on.
inline message make_notification(std::uint16_t service_id, std::uint16_t event_id,
                                 std::uint8_t interface_version, std::uint16_t session_id,
                                 byte_vec payload) {
    message m;
    m.header.service_id = service_id;
    m.header.method_id = static_cast<std::uint16_t>(event_id | event_id_flag);
    m.header.length = static_cast<std::uint32_t>(length_tail + payload.size());
    m.header.session_id = session_id;
    m.header.interface_version = interface_version;
    m.header.type = message_type::notification;
    m.payload = std::move(payload);
    return m;
}

inline result<void> check_header(const header& h, std::size_t payload_size) {
    if (h.length != length_tail + payload_size)
        return {errc::invalid_header, "length field does not match payload size"};
    if (h.protocol_version != protocol_version_v1)
        return {errc::invalid_header, "protocol version must be 1"};
    if (h.type == message_type::notification && (h.method_id & event_id_flag) == 0)
        return {errc::invalid_header, "notification method id must have bit 15 set"};
    return {};
}

inline result<byte_vec> encode_message(const message& m) {
    if (auto r = check_header(m.header, m.payload.size()); !r) return r.err();
    byte_vec out;
    out.reserve(header_size + m.payload.size());
    byte_writer w{out};
    w.u16_be(m.header.service_id);
    w.u16_be(m.header.method_id);
    w.u32_be(m.header.length);
    w.u16_be(m.header.client_id);
    w.u16_be(m.header.session_id);
    w.u8(m.header.protocol_version);
    w.u8(m.header.interface_version);
    w.u8(static_cast<std::uint8_t>(m.header.type));
    w.u8(static_cast<std::uint8_t>(m.header.code));
    w.raw(m.payload);
    return out;
}

struct decoded_message {
    someip::message msg;
    /// Bytes consumed from the input; anything beyond is the framing
    /// remainder left for stream reassembly.
    std::size_t consumed = 0;
};

inline result<decoded_message> decode_message(byte_span in) {
    if (in.size() < header_size)
        return {errc::truncated, "need at least 16 bytes for a SOME/IP header"};
    byte_reader r{in};
    decoded_message out;
    auto& h = out.msg.header;
    h.service_id = r.u16_be();
    h.method_id = r.u16_be();
    h.length = r.u32_be();
    h.client_id = r.u16_be();
    h.session_id = r.u16_be();
    h.protocol_version = r.u8();
    h.interface_version = r.u8();
    const std::uint8_t type_raw = r.u8();
    const std::uint8_t code_raw = r.u8();

    if (h.protocol_version != protocol_version_v1)
        return {errc::bad_protocol_version,
                "protocol version " + std::to_string(h.protocol_version)};
    if (h.length < length_tail)
        return {errc::invalid_header, "length field below minimum of 8"};
    if (!known_message_type(type_raw))
        return {errc::invalid_header, "unknown message type " + std::to_string(type_raw)};
    if (!known_return_code(code_raw))
        return {errc::invalid_header, "unknown return code " + std::to_string(code_raw)};
    h.type = static_cast<message_type>(type_raw);
    h.code = static_cast<return_code>(code_raw);
    if (h.type == message_type::notification && (h.method_id & event_id_flag) == 0)
        return {errc::invalid_header, "notification method id must have bit 15 set"};

    const std::size_t payload_size = h.length - length_tail;
    if (!r.can_read(payload_size))
        return {errc::truncated, "declared length exceeds available bytes"};
    auto p = r.raw(payload_size);
    out.msg.payload.assign(p.begin(), p.end());
    out.consumed = r.pos();
    return out;
}

/// Per-service session counter: 1..0xFFFF, wrapping back to 1. Zero is
/// reserved for "no session awareness" and never produced.
class session_counter {
public:
    std::uint16_t next(std::uint16_t service_id) {
        std::uint16_t& c = counters_[service_id];
        c = (c == 0xFFFF) ? 1 : static_cast<std::uint16_t>(c + 1);
        return c;
    }

private:
    std::map<std::uint16_t, std::uint16_t> counters_;
};

} // namespace somebridge::someip

#endif // SOMEBRIDGE_SOMEIP_MESSAGE_HPP
