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

#ifndef SOMEBRIDGE_SCHEMA_PARSE_HPP
#define SOMEBRIDGE_SCHEMA_PARSE_HPP

#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "somebridge/core.hpp"
#include "somebridge/schema/model.hpp"

namespace somebridge::schema {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

inline std::optional<prim> prim_from_name(std::string_view s) {
    static const std::pair<std::string_view, prim> table[] = {
        {"bool", prim::boolean},  {"int8", prim::int8},       {"uint8", prim::uint8},
        {"int16", prim::int16},   {"uint16", prim::uint16},   {"int32", prim::int32},
        {"uint32", prim::uint32}, {"int64", prim::int64},     {"uint64", prim::uint64},
        {"float32", prim::float32}, {"float64", prim::float64}, {"string", prim::string},
    };
    for (const auto& [name, p] : table)
        if (name == s) return p;
    return std::nullopt;
}

/// Valid nested reference: Name or package/Name.
inline bool is_type_reference(std::string_view s) {
    auto slash = s.find('/');
    if (slash == std::string_view::npos) return is_identifier(s);
    return is_identifier(s.substr(0, slash)) && is_identifier(s.substr(slash + 1)) &&
           s.find('/', slash + 1) == std::string_view::npos;
}

} // namespace detail

/// Parses one message definition. `type_name` is the canonical package/Name
/// of the file being parsed. Nested references stay as written; resolution
/// happens when the registry is finalized.
inline result<message_schema> parse_msg_text(std::string type_name, std::string_view text) {
    message_schema schema;
    schema.type_name = std::move(type_name);
    std::set<std::string, std::less<>> seen;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        ++line_no;
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;

        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        auto err = [&](std::string what) -> result<message_schema> {
            return {errc::parse_error,
                    schema.type_name + " line " + std::to_string(line_no) + ": " + what};
        };

        // bounded types also contain '=', so check before the constant skip
        if (line.find('<') != std::string_view::npos)
            return err("bounded types are not supported");
        if (line.find('=') != std::string_view::npos) continue; // constant, ignored

        // exactly two tokens: type and field name
        std::size_t sp = line.find_first_of(" \t");
        if (sp == std::string_view::npos) return err("expected 'type name'");
        std::string_view type_tok = line.substr(0, sp);
        std::string_view name_tok = detail::trim(line.substr(sp));
        if (name_tok.find_first_of(" \t") != std::string_view::npos)
            return err("expected 'type name'");

        field_type ft;
        std::string_view base = type_tok;
        if (auto br = type_tok.find('['); br != std::string_view::npos) {
            if (type_tok.back() != ']') return err("unterminated array suffix");
            base = type_tok.substr(0, br);
            std::string_view dim = type_tok.substr(br + 1, type_tok.size() - br - 2);
            if (dim.empty()) {
                ft.shape = field_type::container::sequence;
            } else {
                std::size_t n = 0;
                for (char c : dim) {
                    if (!std::isdigit(static_cast<unsigned char>(c)))
                        return err("array length must be a positive integer");
                    n = n * 10 + static_cast<std::size_t>(c - '0');
                    if (n > (1u << 24)) return err("array length out of range");
                }
                if (n == 0) return err("array length must be a positive integer");
                ft.shape = field_type::container::fixed_array;
                ft.array_len = n;
            }
        }

        if (auto p = detail::prim_from_name(base)) {
            ft.p = *p;
        } else if (detail::is_type_reference(base)) {
            ft.is_nested = true;
            ft.nested_type = std::string(base);
        } else {
            return err("unknown type '" + std::string(base) + "'");
        }

        if (!detail::is_identifier(name_tok))
            return err("invalid field name '" + std::string(name_tok) + "'");
        if (!seen.insert(std::string(name_tok)).second)
            return err("duplicate field name '" + std::string(name_tok) + "'");

        schema.fields.push_back({std::string(name_tok), ft});
    }
    return schema;
}

namespace detail {

inline std::string package_of(std::string_view type_name) {
    auto slash = type_name.find('/');
    return std::string(slash == std::string_view::npos ? std::string_view{}
                                                       : type_name.substr(0, slash));
}

inline result<void> check_acyclic(const schema_registry& reg) {
    enum class color : std::uint8_t { white, gray, black };
    std::map<std::string, color, std::less<>> colors;

    struct frame {
        const message_schema* schema;
        std::size_t next_field = 0;
    };
    for (const auto& [name, root] : reg) {
        if (colors[name] == color::black) continue;
        std::vector<frame> stack{{&root}};
        colors[name] = color::gray;
        while (!stack.empty()) {
            auto& top = stack.back();
            if (top.next_field >= top.schema->fields.size()) {
                colors[top.schema->type_name] = color::black;
                stack.pop_back();
                continue;
            }
            const auto& ft = top.schema->fields[top.next_field++].type;
            if (!ft.is_nested) continue;
            auto c = colors[ft.nested_type];
            if (c == color::gray)
                return {errc::invalid_config,
                        "recursive type: " + top.schema->type_name + " -> " + ft.nested_type};
            if (c == color::black) continue;
            colors[ft.nested_type] = color::gray;
            stack.push_back({reg.find(ft.nested_type)});
        }
    }
    return {};
}

} // namespace detail

/// Canonicalizes nested references, verifies they resolve, rejects recursion,
/// and returns the immutable registry. Bare references resolve against the
/// referencing schema's own package, with "Header" falling back to std_msgs.
inline result<schema_registry> finalize_registry(std::vector<message_schema> schemas) {
    std::set<std::string, std::less<>> names;
    for (const auto& s : schemas) names.insert(s.type_name);

    for (auto& s : schemas) {
        std::string pkg = detail::package_of(s.type_name);
        for (auto& f : s.fields) {
            if (!f.type.is_nested) continue;
            const std::string& ref = f.type.nested_type;
            std::string canonical;
            if (ref.find('/') != std::string::npos) {
                canonical = ref;
            } else if (names.count(pkg + "/" + ref)) {
                canonical = pkg + "/" + ref;
            } else if (ref == "Header" && names.count("std_msgs/Header")) {
                canonical = "std_msgs/Header";
            } else {
                canonical = ref;
            }
            if (!names.count(canonical))
                return {errc::unknown_type,
                        s.type_name + "." + f.name + ": unresolved type '" + ref + "'"};
            f.type.nested_type = canonical;
        }
    }

    schema_registry reg;
    for (auto& s : schemas)
        if (auto r = reg.add(std::move(s)); !r) return r.err();
    if (auto r = detail::check_acyclic(reg); !r) return r.err();
    return reg;
}

/// Loads every <package>/msg/<Name>.msg under `root` into one registry.
inline result<schema_registry> load_schema_dir(const std::filesystem::path& root) {
    std::error_code ec;
    if (!std::filesystem::is_directory(root, ec))
        return {errc::io_error, "schema directory not found: " + root.string()};

    std::vector<message_schema> schemas;
    std::vector<std::filesystem::path> files;
    for (auto it = std::filesystem::recursive_directory_iterator(root, ec);
         it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) return {errc::io_error, "walking " + root.string() + ": " + ec.message()};
        if (!it->is_regular_file()) continue;
        const auto& p = it->path();
        if (p.extension() != ".msg") continue;
        if (p.parent_path().filename() != "msg") continue;
        files.push_back(p);
    }
    std::sort(files.begin(), files.end());

    for (const auto& p : files) {
        std::string pkg = p.parent_path().parent_path().filename().string();
        std::string type_name = pkg + "/" + p.stem().string();
        std::ifstream in(p);
        if (!in) return {errc::io_error, "cannot read " + p.string()};
        std::ostringstream body;
        body << in.rdbuf();
        auto parsed = parse_msg_text(std::move(type_name), body.str());
        if (!parsed) return parsed.err();
        schemas.push_back(std::move(*parsed));
    }
    return finalize_registry(std::move(schemas));
}

} // namespace somebridge::schema

#endif // SOMEBRIDGE_SCHEMA_PARSE_HPP
