// Hand-rolled reference layout builders for the two canonical payload
// encodings. Deliberately append-only and arithmetic-only so expected byte
// strings are derived without touching the codec under test.

#ifndef SOMEBRIDGE_TESTS_ORACLE_SCHEMA_HPP
#define SOMEBRIDGE_TESTS_ORACLE_SCHEMA_HPP

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

using bytes = std::vector<std::uint8_t>;

/// Append zero bytes until the buffer length is a multiple of align.
inline void pad_to(bytes& out, std::size_t align) {
    while (out.size() % align != 0) out.push_back(0);
}

/// Little-endian integer of the given byte width.
inline void put_le(bytes& out, std::uint64_t v, std::size_t width) {
    for (std::size_t i = 0; i < width; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

/// Big-endian integer of the given byte width.
inline void put_be(bytes& out, std::uint64_t v, std::size_t width) {
    for (std::size_t i = width; i-- > 0;) out.push_back(std::uint8_t(v >> (8 * i)));
}

inline void put_f32_le(bytes& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v), 4); }
inline void put_f64_le(bytes& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v), 8); }
inline void put_f32_be(bytes& out, float v) { put_be(out, std::bit_cast<std::uint32_t>(v), 4); }
inline void put_f64_be(bytes& out, double v) { put_be(out, std::bit_cast<std::uint64_t>(v), 8); }

/// Bus string: aligned u32 length counting the terminator, bytes, NUL.
inline void put_string_bus(bytes& out, const std::string& s) {
    pad_to(out, 4);
    put_le(out, s.size() + 1, 4);
    for (char c : s) out.push_back(std::uint8_t(c));
    out.push_back(0);
}

/// SOME/IP string: u32 byte length, bytes, no terminator.
inline void put_string_someip(bytes& out, const std::string& s) {
    put_be(out, s.size(), 4);
    for (char c : s) out.push_back(std::uint8_t(c));
}

} // namespace oracle

#endif // SOMEBRIDGE_TESTS_ORACLE_SCHEMA_HPP
