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

#ifndef SOMEBRIDGE_CLOCK_HPP
#define SOMEBRIDGE_CLOCK_HPP

#include <chrono>
#include <cstdint>

namespace somebridge {

/// All timing state in the library is expressed as monotonic nanoseconds so
/// state machines can be driven by either the host clock or a manual clock.
using time_point = std::int64_t; // nanoseconds on a monotonic timeline
using duration_ns = std::int64_t;

inline constexpr duration_ns ns(std::int64_t v) { return v; }
inline constexpr duration_ns us(std::int64_t v) { return v * 1000; }
inline constexpr duration_ns ms(std::int64_t v) { return v * 1000000; }
inline constexpr duration_ns seconds(std::int64_t v) { return v * 1000000000; }

inline time_point steady_now() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

/// Hand-advanced clock for deterministic state machine tests.
struct manual_clock {
    time_point now = 0;
    void advance(duration_ns d) { now += d; }
    void set(time_point t) { now = t; }
};

} // namespace somebridge

#endif // SOMEBRIDGE_CLOCK_HPP
