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

#ifndef SOMEBRIDGE_SCHEMA_MODEL_HPP
#define SOMEBRIDGE_SCHEMA_MODEL_HPP

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "somebridge/bytes.hpp"
#include "somebridge/core.hpp"

namespace somebridge::schema {

enum class prim : std::uint8_t {
    boolean,
    int8,
    uint8,
    int16,
    uint16,
    int32,
    uint32,
    int64,
    uint64,
    float32,
    float64,
    string,
};

inline constexpr std::string_view prim_name(prim p) {
    switch (p) {
        case prim::boolean: return "bool";
        case prim::int8: return "int8";
        case prim::uint8: return "uint8";
        case prim::int16: return "int16";
        case prim::uint16: return "uint16";
        case prim::int32: return "int32";
        case prim::uint32: return "uint32";
        case prim::int64: return "int64";
        case prim::uint64: return "uint64";
        case prim::float32: return "float32";
        case prim::float64: return "float64";
        case prim::string: return "string";
    }
    return "?";
}

/// Fixed width of a primitive's wire form; strings are dynamic and report 0.
inline constexpr std::size_t prim_width(prim p) {
    switch (p) {
        case prim::boolean:
        case prim::int8:
        case prim::uint8: return 1;
        case prim::int16:
        case prim::uint16: return 2;
        case prim::int32:
        case prim::uint32:
        case prim::float32: return 4;
        case prim::int64:
        case prim::uint64:
        case prim::float64: return 8;
        case prim::string: return 0;
    }
    return 0;
}

/// One field's type: an element (primitive or nested message) plus an
/// optional container dimension.
struct field_type {
    enum class container : std::uint8_t { scalar, fixed_array, sequence };

    container shape = container::scalar;
    bool is_nested = false;
    prim p = prim::boolean;
    std::string nested_type; // canonical package/Name once resolved
    std::size_t array_len = 0;

    bool operator==(const field_type&) const = default;

    static field_type scalar_of(prim p) { return {container::scalar, false, p, {}, 0}; }
    static field_type nested_of(std::string type_name) {
        return {container::scalar, true, prim::boolean, std::move(type_name), 0};
    }
};

struct field_def {
    std::string name;
    field_type type;
    bool operator==(const field_def&) const = default;
};

struct message_schema {
    std::string type_name; // package/Name
    std::vector<field_def> fields;
    bool operator==(const message_schema&) const = default;
};

// ---- value tree ----

class value;

/// Nested message payload: field values in schema declaration order.
struct struct_value {
    std::vector<value> fields;
    bool operator==(const struct_value&) const;
};

/// A dynamically typed tree mirroring one schema. uint8 arrays and sequences
/// use the dedicated blob alternative so bulk payloads stay contiguous.
class value {
public:
    using list = std::vector<value>;
    using storage =
        std::variant<bool, std::int8_t, std::uint8_t, std::int16_t, std::uint16_t,
                     std::int32_t, std::uint32_t, std::int64_t, std::uint64_t, float,
                     double, std::string, byte_vec, list, struct_value>;

    value() = default;
    template <class T>
        requires std::is_constructible_v<storage, T&&>
    value(T&& v) : v_(std::forward<T>(v)) {}

    storage& raw() { return v_; }
    const storage& raw() const { return v_; }

    template <class T> bool is() const { return std::holds_alternative<T>(v_); }
    template <class T> const T& as() const { return std::get<T>(v_); }
    template <class T> T& as() { return std::get<T>(v_); }

    /// Floats compare by bit pattern so NaN-carrying samples stay comparable
    /// across codec round trips.
    bool operator==(const value& other) const {
        if (v_.index() != other.v_.index()) return false;
        if (is<float>())
            return std::bit_cast<std::uint32_t>(as<float>()) ==
                   std::bit_cast<std::uint32_t>(other.as<float>());
        if (is<double>())
            return std::bit_cast<std::uint64_t>(as<double>()) ==
                   std::bit_cast<std::uint64_t>(other.as<double>());
        return v_ == other.v_;
    }

private:
    storage v_;
};

inline bool struct_value::operator==(const struct_value& o) const { return fields == o.fields; }

// ---- registry ----

/// Immutable-after-load lookup of message schemas by canonical name.
class schema_registry {
public:
    result<void> add(message_schema s) {
        if (s.type_name.empty())
            return {errc::invalid_config, "schema without a type name"};
        auto [it, fresh] = by_name_.emplace(s.type_name, std::move(s));
        if (!fresh) return {errc::invalid_config, "duplicate schema " + it->first};
        return {};
    }

    const message_schema* find(std::string_view type_name) const {
        auto it = by_name_.find(std::string(type_name));
        return it == by_name_.end() ? nullptr : &it->second;
    }

    std::size_t size() const { return by_name_.size(); }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(by_name_.size());
        for (const auto& [name, s] : by_name_) out.push_back(name);
        return out;
    }

    auto begin() const { return by_name_.begin(); }
    auto end() const { return by_name_.end(); }

private:
    std::map<std::string, message_schema, std::less<>> by_name_;
};

// ---- validation ----

namespace detail {

inline bool utf8_valid(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t extra;
        std::uint32_t cp;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c >> 5) == 0x6) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c >> 4) == 0xE) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c >> 3) == 0x1E) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= s.size()) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc >> 6) != 0x2) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        static constexpr std::uint32_t min_cp[4] = {0, 0x80, 0x800, 0x10000};
        if (cp < min_cp[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            return false;
        i += extra + 1;
    }
    return true;
}

inline result<void> validate_element(const schema_registry& reg, const field_type& ft,
                                     const value& v, const std::string& path);

inline result<void> validate_struct(const schema_registry& reg, const message_schema& s,
                                    const value& v, const std::string& path) {
    if (!v.is<struct_value>())
        return {errc::shape_mismatch, path + ": expected struct " + s.type_name};
    const auto& sv = v.as<struct_value>();
    if (sv.fields.size() != s.fields.size())
        return {errc::shape_mismatch,
                path + ": " + s.type_name + " expects " +
                    std::to_string(s.fields.size()) + " fields, got " +
                    std::to_string(sv.fields.size())};
    for (std::size_t i = 0; i < s.fields.size(); ++i) {
        const auto& fd = s.fields[i];
        std::string fpath = path.empty() ? fd.name : path + "." + fd.name;
        const value& fv = sv.fields[i];
        if (fd.type.shape == field_type::container::scalar) {
            if (auto r = validate_element(reg, fd.type, fv, fpath); !r) return r;
            continue;
        }
        // containers: uint8 payloads ride in the blob alternative
        if (!fd.type.is_nested && fd.type.p == prim::uint8) {
            if (!fv.is<byte_vec>())
                return {errc::shape_mismatch, fpath + ": expected byte blob"};
            if (fd.type.shape == field_type::container::fixed_array &&
                fv.as<byte_vec>().size() != fd.type.array_len)
                return {errc::shape_mismatch, fpath + ": fixed array length mismatch"};
            continue;
        }
        if (!fv.is<value::list>())
            return {errc::shape_mismatch, fpath + ": expected list"};
        const auto& lst = fv.as<value::list>();
        if (fd.type.shape == field_type::container::fixed_array &&
            lst.size() != fd.type.array_len)
            return {errc::shape_mismatch, fpath + ": fixed array length mismatch"};
        for (std::size_t k = 0; k < lst.size(); ++k) {
            if (auto r = validate_element(reg, fd.type, lst[k],
                                          fpath + "[" + std::to_string(k) + "]");
                !r)
                return r;
        }
    }
    return {};
}

inline result<void> validate_element(const schema_registry& reg, const field_type& ft,
                                     const value& v, const std::string& path) {
    if (ft.is_nested) {
        const message_schema* nested = reg.find(ft.nested_type);
        if (!nested) return {errc::unknown_type, path + ": " + ft.nested_type};
        return validate_struct(reg, *nested, v, path);
    }
    auto want = [&](bool got, std::string_view name) -> result<void> {
        if (got) return {};
        return {errc::shape_mismatch,
                path + ": expected " + std::string(name) + " value"};
    };
    switch (ft.p) {
        case prim::boolean: return want(v.is<bool>(), "bool");
        case prim::int8: return want(v.is<std::int8_t>(), "int8");
        case prim::uint8: return want(v.is<std::uint8_t>(), "uint8");
        case prim::int16: return want(v.is<std::int16_t>(), "int16");
        case prim::uint16: return want(v.is<std::uint16_t>(), "uint16");
        case prim::int32: return want(v.is<std::int32_t>(), "int32");
        case prim::uint32: return want(v.is<std::uint32_t>(), "uint32");
        case prim::int64: return want(v.is<std::int64_t>(), "int64");
        case prim::uint64: return want(v.is<std::uint64_t>(), "uint64");
        case prim::float32: return want(v.is<float>(), "float32");
        case prim::float64: return want(v.is<double>(), "float64");
        case prim::string:
            if (!v.is<std::string>())
                return {errc::shape_mismatch, path + ": expected string value"};
            if (!utf8_valid(v.as<std::string>()))
                return {errc::shape_mismatch, path + ": string is not valid UTF-8"};
            return {};
    }
    return {errc::shape_mismatch, path + ": unhandled primitive"};
}

} // namespace detail

/// Checks that a value tree conforms to its schema, including nested shapes,
/// fixed array lengths, and string UTF-8 validity.
inline result<void> validate(const schema_registry& reg, const message_schema& s,
                             const value& v) {
    return detail::validate_struct(reg, s, v, "");
}

} // namespace somebridge::schema

#endif // SOMEBRIDGE_SCHEMA_MODEL_HPP
