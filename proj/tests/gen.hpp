// Seeded random generators shared by the property tests.

#ifndef SOMEBRIDGE_TESTS_GEN_HPP
#define SOMEBRIDGE_TESTS_GEN_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "somebridge/someip/message.hpp"

namespace gen {

using rng = std::mt19937_64;

inline std::uint64_t u64(rng& g, std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(g);
}

inline std::uint32_t u32(rng& g, std::uint32_t lo, std::uint32_t hi) {
    return std::uniform_int_distribution<std::uint32_t>(lo, hi)(g);
}

inline std::uint16_t u16(rng& g) {
    return static_cast<std::uint16_t>(u32(g, 0, 0xFFFF));
}

inline std::vector<std::uint8_t> blob(rng& g, std::size_t n) {
    std::vector<std::uint8_t> b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(u32(g, 0, 0xFF));
    return b;
}

/// ASCII identifier-ish string, safe for topic and field names.
inline std::string ident(rng& g, std::size_t max_len = 12) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz_0123456789";
    std::size_t n = 1 + u64(g, 0, max_len - 1);
    std::string s;
    s.push_back(alphabet[u64(g, 0, 26)]); // letter or underscore first
    for (std::size_t i = 1; i < n; ++i) s.push_back(alphabet[u64(g, 0, sizeof alphabet - 2)]);
    return s;
}

/// Valid SOME/IP message with randomized header fields and payload.
inline somebridge::someip::message someip_message(rng& g, std::size_t max_payload = 256) {
    using namespace somebridge::someip;
    message m;
    m.header.service_id = u16(g);
    m.header.client_id = u16(g);
    m.header.session_id = u16(g);
    m.header.interface_version = static_cast<std::uint8_t>(u32(g, 0, 0xFF));
    switch (u32(g, 0, 4)) {
        case 0: m.header.type = message_type::request; break;
        case 1: m.header.type = message_type::request_no_return; break;
        case 2: m.header.type = message_type::notification; break;
        case 3: m.header.type = message_type::response; break;
        default: m.header.type = message_type::error; break;
    }
    switch (u32(g, 0, 4)) {
        case 0: m.header.code = return_code::ok; break;
        case 1: m.header.code = return_code::not_ok; break;
        case 2: m.header.code = return_code::unknown_service; break;
        case 3: m.header.code = return_code::wrong_protocol_version; break;
        default: m.header.code = return_code::wrong_interface_version; break;
    }
    m.header.method_id = u16(g);
    if (m.header.type == message_type::notification)
        m.header.method_id |= event_id_flag;
    m.payload = blob(g, u64(g, 0, max_payload));
    m.header.length = static_cast<std::uint32_t>(length_tail + m.payload.size());
    return m;
}

} // namespace gen

#endif // SOMEBRIDGE_TESTS_GEN_HPP
