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

#ifndef SOMEBRIDGE_BYTES_HPP
#define SOMEBRIDGE_BYTES_HPP

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

namespace somebridge {

using byte_vec = std::vector<std::uint8_t>;
using byte_span = std::span<const std::uint8_t>;

/// Appends integers in a fixed byte order. Network protocols here are
/// big-endian; the bus encoding is little-endian.
class byte_writer {
public:
    explicit byte_writer(byte_vec& out) : out_(out) {}

    std::size_t size() const { return out_.size(); }

    void u8(std::uint8_t v) { out_.push_back(v); }

    void u16_be(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
        out_.push_back(static_cast<std::uint8_t>(v));
    }
    void u24_be(std::uint32_t v) {
        out_.push_back(static_cast<std::uint8_t>(v >> 16));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
        out_.push_back(static_cast<std::uint8_t>(v));
    }
    void u32_be(std::uint32_t v) {
        out_.push_back(static_cast<std::uint8_t>(v >> 24));
        out_.push_back(static_cast<std::uint8_t>(v >> 16));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
        out_.push_back(static_cast<std::uint8_t>(v));
    }
    void u64_be(std::uint64_t v) {
        u32_be(static_cast<std::uint32_t>(v >> 32));
        u32_be(static_cast<std::uint32_t>(v));
    }

    void u16_le(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32_le(std::uint32_t v) {
        out_.push_back(static_cast<std::uint8_t>(v));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
        out_.push_back(static_cast<std::uint8_t>(v >> 16));
        out_.push_back(static_cast<std::uint8_t>(v >> 24));
    }
    void u64_le(std::uint64_t v) {
        u32_le(static_cast<std::uint32_t>(v));
        u32_le(static_cast<std::uint32_t>(v >> 32));
    }

    void raw(byte_span bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    void zeros(std::size_t n) { out_.resize(out_.size() + n, 0); }

    /// Overwrites 4 bytes at an absolute offset; used to backpatch length
    /// fields once the enclosed content size is known.
    void patch_u32_be(std::size_t at, std::uint32_t v) {
        out_[at] = static_cast<std::uint8_t>(v >> 24);
        out_[at + 1] = static_cast<std::uint8_t>(v >> 16);
        out_[at + 2] = static_cast<std::uint8_t>(v >> 8);
        out_[at + 3] = static_cast<std::uint8_t>(v);
    }
    void patch_u32_le(std::size_t at, std::uint32_t v) {
        out_[at] = static_cast<std::uint8_t>(v);
        out_[at + 1] = static_cast<std::uint8_t>(v >> 8);
        out_[at + 2] = static_cast<std::uint8_t>(v >> 16);
        out_[at + 3] = static_cast<std::uint8_t>(v >> 24);
    }

private:
    byte_vec& out_;
};

/// Bounds-checked cursor over an input buffer. Callers check remaining()
/// before reading; reads past the end are programming errors.
class byte_reader {
public:
    explicit byte_reader(byte_span in) : in_(in) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return in_.size() - pos_; }
    bool can_read(std::size_t n) const { return remaining() >= n; }

    std::uint8_t u8() { return in_[pos_++]; }

    std::uint16_t u16_be() {
        std::uint16_t v = static_cast<std::uint16_t>(in_[pos_] << 8 | in_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    std::uint32_t u24_be() {
        std::uint32_t v = static_cast<std::uint32_t>(in_[pos_]) << 16 |
                          static_cast<std::uint32_t>(in_[pos_ + 1]) << 8 |
                          static_cast<std::uint32_t>(in_[pos_ + 2]);
        pos_ += 3;
        return v;
    }
    std::uint32_t u32_be() {
        std::uint32_t v = static_cast<std::uint32_t>(in_[pos_]) << 24 |
                          static_cast<std::uint32_t>(in_[pos_ + 1]) << 16 |
                          static_cast<std::uint32_t>(in_[pos_ + 2]) << 8 |
                          static_cast<std::uint32_t>(in_[pos_ + 3]);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64_be() {
        std::uint64_t hi = u32_be();
        return hi << 32 | u32_be();
    }

    std::uint16_t u16_le() {
        std::uint16_t v = static_cast<std::uint16_t>(in_[pos_] | in_[pos_ + 1] << 8);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32_le() {
        std::uint32_t v = static_cast<std::uint32_t>(in_[pos_]) |
                          static_cast<std::uint32_t>(in_[pos_ + 1]) << 8 |
                          static_cast<std::uint32_t>(in_[pos_ + 2]) << 16 |
                          static_cast<std::uint32_t>(in_[pos_ + 3]) << 24;
        pos_ += 4;
        return v;
    }
    std::uint64_t u64_le() {
        std::uint64_t lo = u32_le();
        return lo | static_cast<std::uint64_t>(u32_le()) << 32;
    }

    byte_span raw(std::size_t n) {
        byte_span s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    void skip(std::size_t n) { pos_ += n; }

private:
    byte_span in_;
    std::size_t pos_ = 0;
};

/// FNV-1a, used for topic hashes and payload digests.
inline std::uint32_t fnv1a32(byte_span data) {
    std::uint32_t h = 0x811c9dc5u;
    for (std::uint8_t b : data) {
        h ^= b;
        h *= 0x01000193u;
    }
    return h;
}

inline std::uint64_t fnv1a64(byte_span data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint8_t b : data) {
        h ^= b;
        h *= 0x00000100000001b3ull;
    }
    return h;
}

} // namespace somebridge

#endif // SOMEBRIDGE_BYTES_HPP
