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

#ifndef SOMEBRIDGE_BENCH_CAPTURE_HPP
#define SOMEBRIDGE_BENCH_CAPTURE_HPP

#include <algorithm>
#include <atomic>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include "somebridge/bus/bus.hpp"

namespace somebridge::bench {

/// Trace files hold bus samples for later replay: an 8-byte magic, then one
/// length-prefixed record per sample. All integers little-endian:
///   u32 payload length | u64 capture time (monotonic ns) | u64 sequence |
///   payload bytes
/// Replay reproduces the payload bytes exactly; the capture times drive the
/// optional original-spacing mode.
inline constexpr char trace_magic[8] = {'S', 'B', 'T', 'R', 'A', 'C', 'E', '1'};

/// Upper bound on one record's payload; a length field above this is taken
/// as file corruption rather than a real sample.
inline constexpr std::uint32_t trace_max_payload = 64u << 20;

struct trace_record {
    time_point t = 0;
    std::uint64_t seq = 0;
    byte_vec payload;
    bool operator==(const trace_record&) const = default;
};

namespace detail {

inline void put_u32_le(std::ofstream& os, std::uint32_t v) {
    char b[4] = {char(v), char(v >> 8), char(v >> 16), char(v >> 24)};
    os.write(b, 4);
}

inline void put_u64_le(std::ofstream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char(v >> (8 * i));
    os.write(b, 8);
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = v << 8 | p[i];
    return v;
}

} // namespace detail

/// Appends records to a trace file as they arrive, for live recording.
class trace_writer {
public:
    static result<trace_writer> open(const std::filesystem::path& path) {
        trace_writer w;
        w.os_.open(path, std::ios::binary | std::ios::trunc);
        if (!w.os_) return {errc::io_error, "cannot open " + path.string() + " for writing"};
        w.os_.write(trace_magic, sizeof trace_magic);
        if (!w.os_) return {errc::io_error, "cannot write to " + path.string()};
        return w;
    }

    result<void> append(const trace_record& rec) {
        if (rec.payload.size() > trace_max_payload)
            return {errc::oversize_payload, "payload exceeds the trace record limit"};
        detail::put_u32_le(os_, static_cast<std::uint32_t>(rec.payload.size()));
        detail::put_u64_le(os_, static_cast<std::uint64_t>(rec.t));
        detail::put_u64_le(os_, rec.seq);
        os_.write(reinterpret_cast<const char*>(rec.payload.data()),
                  static_cast<std::streamsize>(rec.payload.size()));
        if (!os_) return {errc::io_error, "trace write failed"};
        ++written_;
        return {};
    }

    result<void> close() {
        os_.close();
        if (os_.fail()) return {errc::io_error, "trace close failed"};
        return {};
    }

    std::uint64_t written() const { return written_; }

private:
    trace_writer() = default;

    std::ofstream os_;
    std::uint64_t written_ = 0;
};

inline result<void> write_trace(const std::filesystem::path& path,
                                const std::vector<trace_record>& records) {
    auto w = trace_writer::open(path);
    if (!w) return w.err();
    for (const auto& rec : records)
        if (auto r = w->append(rec); !r) return r;
    return w->close();
}

inline result<std::vector<trace_record>> read_trace(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return {errc::io_error, "cannot open " + path.string()};

    unsigned char magic[sizeof trace_magic];
    is.read(reinterpret_cast<char*>(magic), sizeof magic);
    if (is.gcount() != sizeof magic ||
        std::memcmp(magic, trace_magic, sizeof trace_magic) != 0)
        return {errc::corrupt_trace_file, "bad magic header"};

    std::vector<trace_record> records;
    for (std::uint64_t index = 0;; ++index) {
        unsigned char head[20];
        is.read(reinterpret_cast<char*>(head), sizeof head);
        if (is.gcount() == 0 && is.eof()) break;
        if (is.gcount() != sizeof head)
            return {errc::corrupt_trace_file,
                    "record " + std::to_string(index) + ": truncated header"};
        std::uint32_t len = detail::get_u32_le(head);
        if (len > trace_max_payload)
            return {errc::corrupt_trace_file,
                    "record " + std::to_string(index) + ": implausible payload length"};
        trace_record rec;
        rec.t = static_cast<time_point>(detail::get_u64_le(head + 4));
        rec.seq = detail::get_u64_le(head + 12);
        rec.payload.resize(len);
        is.read(reinterpret_cast<char*>(rec.payload.data()), len);
        if (is.gcount() != static_cast<std::streamsize>(len))
            return {errc::corrupt_trace_file,
                    "record " + std::to_string(index) + ": truncated payload"};
        records.push_back(std::move(rec));
    }
    return records;
}

/// Republishes recorded payloads byte-for-byte. With keep_timing the original
/// inter-arrival gaps are reproduced (capped so a damaged timestamp cannot
/// stall forever); without it records go out back to back. Returns the number
/// published; an armed `stop` ends the run early.
inline result<std::uint64_t> replay_trace(bus::publisher& pub,
                                          const std::vector<trace_record>& records,
                                          bool keep_timing,
                                          const std::atomic<bool>* stop = nullptr) {
    constexpr duration_ns max_gap = seconds(10);
    std::uint64_t published = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (stop && stop->load(std::memory_order_relaxed)) break;
        if (keep_timing && i > 0) {
            duration_ns gap = records[i].t - records[i - 1].t;
            if (gap > 0) std::this_thread::sleep_for(
                std::chrono::nanoseconds(std::min(gap, max_gap)));
        }
        auto r = pub.publish(records[i].payload);
        if (!r) return r.err();
        ++published;
    }
    return published;
}

} // namespace somebridge::bench

#endif // SOMEBRIDGE_BENCH_CAPTURE_HPP
