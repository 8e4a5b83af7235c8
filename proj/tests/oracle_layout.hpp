// Independent byte-layout oracles for the wire formats under test.
//
// Everything in this header is written against the documented layouts by
// direct index arithmetic, deliberately sharing no code with the library
// encoders it checks. Golden vectors in the test suites were produced by
// these functions.

#ifndef SOMEBRIDGE_TESTS_ORACLE_LAYOUT_HPP
#define SOMEBRIDGE_TESTS_ORACLE_LAYOUT_HPP

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace oracle {

using bytes = std::vector<std::uint8_t>;

inline void put16(bytes& b, std::size_t at, std::uint16_t v) {
    b[at] = static_cast<std::uint8_t>(v >> 8);
    b[at + 1] = static_cast<std::uint8_t>(v);
}

inline void put32(bytes& b, std::size_t at, std::uint32_t v) {
    b[at] = static_cast<std::uint8_t>(v >> 24);
    b[at + 1] = static_cast<std::uint8_t>(v >> 16);
    b[at + 2] = static_cast<std::uint8_t>(v >> 8);
    b[at + 3] = static_cast<std::uint8_t>(v);
}

// ---------------------------------------------------------------------------
// SOME/IP message: fixed 16-byte header, all fields big-endian, payload
// appended verbatim. length counts everything after the length field.
// ---------------------------------------------------------------------------

struct someip_fields {
    std::uint16_t service_id = 0;
    std::uint16_t method_id = 0;
    std::uint16_t client_id = 0;
    std::uint16_t session_id = 0;
    std::uint8_t protocol_version = 1;
    std::uint8_t interface_version = 0;
    std::uint8_t message_type = 0;
    std::uint8_t return_code = 0;
};

inline bytes someip_frame(const someip_fields& f, const bytes& payload) {
    bytes b(16 + payload.size(), 0);
    put16(b, 0, f.service_id);
    put16(b, 2, f.method_id);
    put32(b, 4, static_cast<std::uint32_t>(8 + payload.size()));
    put16(b, 8, f.client_id);
    put16(b, 10, f.session_id);
    b[12] = f.protocol_version;
    b[13] = f.interface_version;
    b[14] = f.message_type;
    b[15] = f.return_code;
    std::memcpy(b.data() + 16, payload.data(), payload.size());
    return b;
}

// ---------------------------------------------------------------------------
// Service discovery payload:
//   head (8B):   flags u8 (bit7 reboot) | reserved u8 | session u16 |
//                entries_len u32 (bytes)
//   entry (20B): type u8 | option_index u8 (0xFF none) | service u16 |
//                instance u16 | major u8 | ttl u24 | minor u32 |
//                eventgroup u16 | counter u16 | reserved u16
//   options_len u32 (bytes)
//   option (16B): type u8 (0x04) | reserved u8 | body_len u16 (=12) |
//                 ipv4 u32 | port u16 | l4proto u8 (0x11) | reserved u8 |
//                 reserved u32
// ---------------------------------------------------------------------------

struct sd_entry_fields {
    std::uint8_t type = 0; // 0x00 find, 0x01 offer, 0x06 subscribe, 0x07 ack
    std::uint16_t service_id = 0;
    std::uint16_t instance_id = 0;
    std::uint8_t major = 0;
    std::uint32_t ttl = 0; // 24-bit seconds
    std::uint32_t minor = 0;
    std::uint16_t eventgroup = 0;
    bool has_endpoint = false;
    std::uint32_t ipv4 = 0;
    std::uint16_t port = 0;
};

inline bytes sd_payload(bool reboot, std::uint16_t session,
                        const std::vector<sd_entry_fields>& entries) {
    // Options are deduplicated by (ipv4, port) in entry order.
    std::vector<std::pair<std::uint32_t, std::uint16_t>> opts;
    std::vector<std::uint8_t> opt_index(entries.size(), 0xFF);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!entries[i].has_endpoint) continue;
        auto key = std::make_pair(entries[i].ipv4, entries[i].port);
        std::size_t at = opts.size();
        for (std::size_t j = 0; j < opts.size(); ++j)
            if (opts[j] == key) at = j;
        if (at == opts.size()) opts.push_back(key);
        opt_index[i] = static_cast<std::uint8_t>(at);
    }

    bytes b(8 + entries.size() * 20 + 4 + opts.size() * 16, 0);
    b[0] = reboot ? 0x80 : 0x00;
    put16(b, 2, session);
    put32(b, 4, static_cast<std::uint32_t>(entries.size() * 20));
    std::size_t at = 8;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        b[at] = e.type;
        b[at + 1] = opt_index[i];
        put16(b, at + 2, e.service_id);
        put16(b, at + 4, e.instance_id);
        b[at + 6] = e.major;
        b[at + 7] = static_cast<std::uint8_t>(e.ttl >> 16);
        b[at + 8] = static_cast<std::uint8_t>(e.ttl >> 8);
        b[at + 9] = static_cast<std::uint8_t>(e.ttl);
        put32(b, at + 10, e.minor);
        put16(b, at + 14, e.eventgroup);
        at += 20;
    }
    put32(b, at, static_cast<std::uint32_t>(opts.size() * 16));
    at += 4;
    for (const auto& [ip, port] : opts) {
        b[at] = 0x04;
        put16(b, at + 2, 12);
        put32(b, at + 4, ip);
        put16(b, at + 8, port);
        b[at + 10] = 0x11;
        at += 16;
    }
    return b;
}

// ---------------------------------------------------------------------------
// Bus-encoding alignment rule: each primitive is aligned to its own size,
// measured from the start of the message. Returns the padded offset.
// ---------------------------------------------------------------------------

inline std::size_t aligned_offset(std::size_t offset, std::size_t size) {
    std::size_t rem = offset % size;
    return rem == 0 ? offset : offset + (size - rem);
}

} // namespace oracle

#endif // SOMEBRIDGE_TESTS_ORACLE_LAYOUT_HPP
