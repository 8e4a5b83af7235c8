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

#ifndef SOMEBRIDGE_NET_ENDPOINT_HPP
#define SOMEBRIDGE_NET_ENDPOINT_HPP

#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace somebridge::net {

/// IPv4 address + UDP port. The address is kept in host byte order.
struct endpoint {
    std::uint32_t ipv4 = 0;
    std::uint16_t port = 0;

    auto operator<=>(const endpoint&) const = default;

    bool valid() const { return port != 0; }

    std::string to_string() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%u.%u.%u.%u:%u", (ipv4 >> 24) & 0xff,
                      (ipv4 >> 16) & 0xff, (ipv4 >> 8) & 0xff, ipv4 & 0xff, port);
        return buf;
    }
};

inline std::optional<std::uint32_t> parse_ipv4(std::string_view s) {
    std::uint32_t parts[4];
    int idx = 0;
    std::uint32_t cur = 0;
    int digits = 0;
    for (char c : s) {
        if (c == '.') {
            if (digits == 0 || idx >= 3) return std::nullopt;
            parts[idx++] = cur;
            cur = 0;
            digits = 0;
        } else if (c >= '0' && c <= '9') {
            cur = cur * 10 + static_cast<std::uint32_t>(c - '0');
            if (cur > 255 || ++digits > 3) return std::nullopt;
        } else {
            return std::nullopt;
        }
    }
    if (idx != 3 || digits == 0) return std::nullopt;
    parts[3] = cur;
    return parts[0] << 24 | parts[1] << 16 | parts[2] << 8 | parts[3];
}

/// Parses "a.b.c.d:port".
inline std::optional<endpoint> parse_endpoint(std::string_view s) {
    auto colon = s.rfind(':');
    if (colon == std::string_view::npos) return std::nullopt;
    auto addr = parse_ipv4(s.substr(0, colon));
    if (!addr) return std::nullopt;
    std::uint32_t port = 0;
    auto ps = s.substr(colon + 1);
    if (ps.empty()) return std::nullopt;
    for (char c : ps) {
        if (c < '0' || c > '9') return std::nullopt;
        port = port * 10 + static_cast<std::uint32_t>(c - '0');
        if (port > 0xffff) return std::nullopt;
    }
    return endpoint{*addr, static_cast<std::uint16_t>(port)};
}

inline constexpr std::uint32_t loopback_ipv4 = 0x7f000001; // 127.0.0.1

} // namespace somebridge::net

#endif // SOMEBRIDGE_NET_ENDPOINT_HPP
