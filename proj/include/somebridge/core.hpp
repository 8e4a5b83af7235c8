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

#ifndef SOMEBRIDGE_CORE_HPP
#define SOMEBRIDGE_CORE_HPP

#include <cassert>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace somebridge {

enum class errc : std::uint8_t {
    ok = 0,
    // codec
    invalid_header,
    truncated,
    bad_protocol_version,
    malformed_entry,
    // service discovery
    already_offered,
    not_discovered,
    // bus
    type_mismatch,
    bus_closed,
    oversize_payload,
    // schema
    parse_error,
    unknown_type,
    shape_mismatch,
    // config
    id_mismatch,
    missing_field,
    invalid_id,
    invalid_config,
    // bench
    insufficient_samples,
    lost_message,
    corrupt_trace_file,
    // runtime
    port_in_use,
    io_error,
    timeout,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::ok: return "ok";
        case errc::invalid_header: return "invalid_header";
        case errc::truncated: return "truncated";
        case errc::bad_protocol_version: return "bad_protocol_version";
        case errc::malformed_entry: return "malformed_entry";
        case errc::already_offered: return "already_offered";
        case errc::not_discovered: return "not_discovered";
        case errc::type_mismatch: return "type_mismatch";
        case errc::bus_closed: return "bus_closed";
        case errc::oversize_payload: return "oversize_payload";
        case errc::parse_error: return "parse_error";
        case errc::unknown_type: return "unknown_type";
        case errc::shape_mismatch: return "shape_mismatch";
        case errc::id_mismatch: return "id_mismatch";
        case errc::missing_field: return "missing_field";
        case errc::invalid_id: return "invalid_id";
        case errc::invalid_config: return "invalid_config";
        case errc::insufficient_samples: return "insufficient_samples";
        case errc::lost_message: return "lost_message";
        case errc::corrupt_trace_file: return "corrupt_trace_file";
        case errc::port_in_use: return "port_in_use";
        case errc::io_error: return "io_error";
        case errc::timeout: return "timeout";
    }
    return "unknown";
}

struct error {
    errc code = errc::ok;
    std::string message;

    std::string to_string() const {
        std::string s = errc_name(code);
        if (!message.empty()) {
            s += ": ";
            s += message;
        }
        return s;
    }
};

inline error make_error(errc code, std::string message = {}) {
    return error{code, std::move(message)};
}

/// Minimal expected-like carrier. value() on an error (and err() on a value)
/// are programming errors and assert.
template <class T>
class [[nodiscard]] result {
public:
    result(T value) : v_(std::move(value)) {}
    result(error e) : v_(std::move(e)) {}
    result(errc code, std::string message = {}) : v_(error{code, std::move(message)}) {}

    bool has_value() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return has_value(); }

    T& value() & {
        assert(has_value());
        return std::get<T>(v_);
    }
    const T& value() const& {
        assert(has_value());
        return std::get<T>(v_);
    }
    T&& value() && {
        assert(has_value());
        return std::get<T>(std::move(v_));
    }
    T& operator*() & { return value(); }
    const T& operator*() const& { return value(); }
    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }

    const error& err() const {
        assert(!has_value());
        return std::get<error>(v_);
    }
    errc code() const { return has_value() ? errc::ok : err().code; }

private:
    std::variant<T, error> v_;
};

template <>
class [[nodiscard]] result<void> {
public:
    result() = default;
    result(error e) : e_(std::move(e)) {}
    result(errc code, std::string message = {}) : e_(error{code, std::move(message)}) {}

    bool has_value() const { return !e_.has_value(); }
    explicit operator bool() const { return has_value(); }

    const error& err() const {
        assert(e_.has_value());
        return *e_;
    }
    errc code() const { return e_ ? e_->code : errc::ok; }

private:
    std::optional<error> e_;
};

inline result<void> ok() { return {}; }

} // namespace somebridge

#endif // SOMEBRIDGE_CORE_HPP
