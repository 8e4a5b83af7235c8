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

#ifndef SOMEBRIDGE_BRIDGE_INTERFACE_FILE_HPP
#define SOMEBRIDGE_BRIDGE_INTERFACE_FILE_HPP

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "somebridge/core.hpp"
#include "somebridge/schema/parse.hpp"

namespace somebridge::bridge {

/// The identification block of one interface file. Every field here is
/// mirrored by the deployment file and must agree with it (grammar reference
/// under docs/interface-grammar.md).
struct iface_ids {
    std::string package_name;
    std::string interface_name;
    std::string method_name;
    std::uint8_t major_version = 0;
    std::uint32_t minor_version = 0;
    std::uint16_t service_id = 0;
    std::uint16_t instance_id = 0;
    std::uint16_t event_id = 0;
    std::uint16_t eventgroup_id = 0;
    std::string payload_type; // canonical package/Name

    bool operator==(const iface_ids&) const = default;
};

/// One node of the expanded payload type as written in the types section.
/// Nested message fields appear as inline struct blocks so the file shows
/// the complete wire layout without chasing references.
struct type_node {
    bool is_block = false; // struct block vs primitive leaf
    schema::field_type::container shape = schema::field_type::container::scalar;
    std::size_t array_len = 0;
    schema::prim p = schema::prim::boolean; // leaves only
    std::string type_name;                  // blocks only, canonical package/Name
    std::string field_name;                 // empty at the root
    std::vector<type_node> members;

    bool operator==(const type_node&) const = default;
};

struct interface_doc {
    iface_ids ids;
    type_node root;
};

namespace detail {

inline std::string dotted(std::string_view canonical) {
    std::string out(canonical);
    for (auto& c : out)
        if (c == '/') c = '.';
    return out;
}

inline std::string slashed(std::string_view dotted_name) {
    std::string out(dotted_name);
    for (auto& c : out)
        if (c == '.') c = '/';
    return out;
}

} // namespace detail

/// Expands a registry schema into the inline tree the types section shows.
inline result<type_node> expand_type(const schema::schema_registry& reg,
                                     std::string_view type_name) {
    const auto* s = reg.find(type_name);
    if (s == nullptr)
        return {errc::unknown_type, "unknown schema " + std::string(type_name)};
    type_node node;
    node.is_block = true;
    node.type_name = s->type_name;
    for (const auto& f : s->fields) {
        if (f.type.is_nested) {
            auto sub = expand_type(reg, f.type.nested_type);
            if (!sub) return sub;
            sub->field_name = f.name;
            sub->shape = f.type.shape;
            sub->array_len = f.type.array_len;
            node.members.push_back(std::move(*sub));
        } else {
            type_node leaf;
            leaf.shape = f.type.shape;
            leaf.array_len = f.type.array_len;
            leaf.p = f.type.p;
            leaf.field_name = f.name;
            node.members.push_back(std::move(leaf));
        }
    }
    return node;
}

/// Lines the types section spends on a node: blocks cost their braces plus
/// members, leaves cost one line. This is the schema-dependent part of the
/// generated file size.
inline std::size_t schema_section_lines(const type_node& node) {
    if (!node.is_block) return 1;
    std::size_t n = 2;
    for (const auto& m : node.members) n += schema_section_lines(m);
    return n;
}

// ---- emission ----

namespace detail {

inline std::string dims_suffix(const type_node& n) {
    using c = schema::field_type::container;
    if (n.shape == c::fixed_array) return "[" + std::to_string(n.array_len) + "]";
    if (n.shape == c::sequence) return "[]";
    return "";
}

inline void emit_hex16(std::string& out, std::uint16_t v) {
    static const char digits[] = "0123456789abcdef";
    out += "0x";
    for (int shift = 12; shift >= 0; shift -= 4) out += digits[(v >> shift) & 0xF];
}

inline void emit_node(std::string& out, const type_node& n, int depth) {
    std::string pad(std::size_t(depth) * 4, ' ');
    if (!n.is_block) {
        out += pad + std::string(schema::prim_name(n.p)) + dims_suffix(n) + " " + n.field_name +
               "\n";
        return;
    }
    if (n.field_name.empty())
        out += pad + "struct " + dotted(n.type_name) + " {\n";
    else
        out += pad + "struct " + n.field_name + dims_suffix(n) + " : " + dotted(n.type_name) +
               " {\n";
    for (const auto& m : n.members) emit_node(out, m, depth + 1);
    out += pad + "}\n";
}

} // namespace detail

/// Renders the interface file. Byte-deterministic: same inputs, same text.
inline std::string emit_interface(const interface_doc& doc) {
    const auto& ids = doc.ids;
    std::string out;
    out += "// somebridge interface definition, generated by confgen\n";
    out += "// edit the generator inputs and re-run instead of patching this file\n";
    out += "package " + ids.package_name + "\n";
    out += "\n";
    out += "interface " + ids.interface_name + " {\n";
    out += "    version { major " + std::to_string(ids.major_version) + " minor " +
           std::to_string(ids.minor_version) + " }\n";
    out += "    service { id ";
    detail::emit_hex16(out, ids.service_id);
    out += " instance ";
    detail::emit_hex16(out, ids.instance_id);
    out += " }\n";
    out += "\n";
    out += "    broadcast " + ids.method_name + " {\n";
    out += "        eventgroup ";
    detail::emit_hex16(out, ids.eventgroup_id);
    out += "\n";
    out += "        event ";
    detail::emit_hex16(out, ids.event_id);
    out += "\n";
    out += "        out {\n";
    out += "            " + detail::dotted(ids.payload_type) + " data\n";
    out += "        }\n";
    out += "    }\n";
    out += "\n";
    out += "    types {\n";
    detail::emit_node(out, doc.root, 2);
    out += "    }\n";
    out += "}\n";
    return out;
}

// ---- parsing ----

namespace detail {

struct token {
    enum class kind : std::uint8_t { word, number, punct, end };
    kind k = kind::end;
    std::string text;
    std::uint64_t num = 0;
    int line = 0;
};

class lexer {
public:
    explicit lexer(std::string_view text) : text_(text) {}

    result<token> next() {
        skip_space();
        token t;
        t.line = line_;
        if (pos_ >= text_.size()) return t;
        char c = text_[pos_];
        if (c == '{' || c == '}' || c == ':' || c == '[' || c == ']') {
            t.k = token::kind::punct;
            t.text = c;
            ++pos_;
            return t;
        }
        if (is_word_char(c)) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && is_word_char(text_[pos_])) ++pos_;
            t.text = std::string(text_.substr(start, pos_ - start));
            if (std::isdigit(static_cast<unsigned char>(c))) {
                t.k = token::kind::number;
                auto parsed = parse_number(t.text);
                if (!parsed) return err("bad number '" + t.text + "'", t.line);
                t.num = *parsed;
            } else {
                t.k = token::kind::word;
            }
            return t;
        }
        return err(std::string("unexpected character '") + c + "'", line_);
    }

private:
    static bool is_word_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    }

    static std::optional<std::uint64_t> parse_number(const std::string& s) {
        std::uint64_t v = 0;
        if (s.size() > 2 && s[0] == '0' && s[1] == 'x') {
            for (std::size_t i = 2; i < s.size(); ++i) {
                char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
                int d = (c >= '0' && c <= '9') ? c - '0' : (c >= 'a' && c <= 'f') ? c - 'a' + 10
                                                                                  : -1;
                if (d < 0) return std::nullopt;
                v = v * 16 + std::uint64_t(d);
            }
            return v;
        }
        for (char c : s) {
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
            v = v * 10 + std::uint64_t(c - '0');
        }
        return v;
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    static error err(std::string what, int line) {
        return {errc::parse_error, "interface file line " + std::to_string(line) + ": " + what};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

/// Pull parser over the token stream with one token of lookahead.
class iface_parser {
public:
    explicit iface_parser(std::string_view text) : lex_(text) {}

    result<interface_doc> parse() {
        if (auto r = advance(); !r) return r.err();
        interface_doc doc;

        if (auto r = expect_word("package"); !r) return r.err();
        if (auto r = take_word(doc.ids.package_name, "package name"); !r) return r.err();
        if (auto r = expect_word("interface"); !r) return r.err();
        if (auto r = take_word(doc.ids.interface_name, "interface name"); !r) return r.err();
        if (auto r = expect_punct('{'); !r) return r.err();

        bool saw_version = false, saw_service = false, saw_broadcast = false, saw_types = false;
        while (!at_punct('}')) {
            if (cur_.k != token::kind::word)
                return err("expected a section keyword");
            if (cur_.text == "version") {
                saw_version = true;
                if (auto r = parse_version(doc.ids); !r) return r.err();
            } else if (cur_.text == "service") {
                saw_service = true;
                if (auto r = parse_service(doc.ids); !r) return r.err();
            } else if (cur_.text == "broadcast") {
                saw_broadcast = true;
                if (auto r = parse_broadcast(doc.ids); !r) return r.err();
            } else if (cur_.text == "types") {
                saw_types = true;
                if (auto r = parse_types(doc); !r) return r.err();
            } else {
                return err("unknown section '" + cur_.text + "'");
            }
        }
        if (auto r = expect_punct('}'); !r) return r.err();
        if (cur_.k != token::kind::end) return err("trailing content after interface block");

        if (!saw_version) return missing("version");
        if (!saw_service) return missing("service");
        if (!saw_broadcast) return missing("broadcast");
        if (!saw_types) return missing("types");
        return doc;
    }

private:
    result<void> parse_version(iface_ids& ids) {
        if (auto r = advance(); !r) return r; // consume 'version'
        if (auto r = expect_punct('{'); !r) return r;
        std::uint64_t major = 0, minor = 0;
        if (auto r = expect_word("major"); !r) return r;
        if (auto r = take_number(major, 0xFF, "major version"); !r) return r;
        if (auto r = expect_word("minor"); !r) return r;
        if (auto r = take_number(minor, 0xFFFFFFFF, "minor version"); !r) return r;
        if (auto r = expect_punct('}'); !r) return r;
        ids.major_version = static_cast<std::uint8_t>(major);
        ids.minor_version = static_cast<std::uint32_t>(minor);
        return {};
    }

    result<void> parse_service(iface_ids& ids) {
        if (auto r = advance(); !r) return r; // consume 'service'
        if (auto r = expect_punct('{'); !r) return r;
        std::uint64_t sid = 0, iid = 0;
        if (auto r = expect_word("id"); !r) return r;
        if (auto r = take_number(sid, 0xFFFF, "service id"); !r) return r;
        if (auto r = expect_word("instance"); !r) return r;
        if (auto r = take_number(iid, 0xFFFF, "instance id"); !r) return r;
        if (auto r = expect_punct('}'); !r) return r;
        ids.service_id = static_cast<std::uint16_t>(sid);
        ids.instance_id = static_cast<std::uint16_t>(iid);
        return {};
    }

    result<void> parse_broadcast(iface_ids& ids) {
        if (auto r = advance(); !r) return r; // consume 'broadcast'
        if (auto r = take_word(ids.method_name, "broadcast name"); !r) return r;
        if (auto r = expect_punct('{'); !r) return r;
        std::uint64_t eg = 0, ev = 0;
        if (auto r = expect_word("eventgroup"); !r) return r;
        if (auto r = take_number(eg, 0xFFFF, "eventgroup id"); !r) return r;
        if (auto r = expect_word("event"); !r) return r;
        if (auto r = take_number(ev, 0xFFFF, "event id"); !r) return r;
        if (auto r = expect_word("out"); !r) return r;
        if (auto r = expect_punct('{'); !r) return r;
        std::string type_tok;
        if (auto r = take_word(type_tok, "payload type"); !r) return r;
        ids.payload_type = slashed(type_tok);
        std::string param;
        if (auto r = take_word(param, "payload parameter name"); !r) return r;
        if (auto r = expect_punct('}'); !r) return r;
        if (auto r = expect_punct('}'); !r) return r;
        ids.eventgroup_id = static_cast<std::uint16_t>(eg);
        ids.event_id = static_cast<std::uint16_t>(ev);
        return {};
    }

    result<void> parse_types(interface_doc& doc) {
        if (auto r = advance(); !r) return r; // consume 'types'
        if (auto r = expect_punct('{'); !r) return r;
        if (cur_.k != token::kind::word || cur_.text != "struct")
            return err("types section must hold one struct block");
        if (auto r = parse_struct(doc.root, /*root=*/true); !r) return r;
        if (auto r = expect_punct('}'); !r) return r;
        return {};
    }

    result<void> parse_struct(type_node& node, bool root) {
        node.is_block = true;
        if (auto r = advance(); !r) return r; // consume 'struct'
        std::string first;
        if (auto r = take_word(first, "struct name"); !r) return r;
        if (root) {
            node.type_name = slashed(first);
        } else {
            node.field_name = first;
            if (auto r = parse_dims(node); !r) return r;
            if (auto r = expect_punct(':'); !r) return r;
            std::string tn;
            if (auto r = take_word(tn, "struct type"); !r) return r;
            node.type_name = slashed(tn);
        }
        if (auto r = expect_punct('{'); !r) return r;
        while (!at_punct('}')) {
            if (cur_.k != token::kind::word) return err("expected a member");
            type_node member;
            if (cur_.text == "struct") {
                if (auto r = parse_struct(member, /*root=*/false); !r) return r;
            } else {
                if (auto r = parse_leaf(member); !r) return r;
            }
            node.members.push_back(std::move(member));
        }
        return advance(); // consume '}'
    }

    result<void> parse_leaf(type_node& node) {
        auto p = schema::detail::prim_from_name(cur_.text);
        if (!p) return err("unknown primitive '" + cur_.text + "'");
        node.p = *p;
        if (auto r = advance(); !r) return r;
        if (auto r = parse_dims(node); !r) return r;
        return take_word(node.field_name, "field name");
    }

    result<void> parse_dims(type_node& node) {
        using c = schema::field_type::container;
        if (!at_punct('[')) return {};
        if (auto r = advance(); !r) return r;
        if (at_punct(']')) {
            node.shape = c::sequence;
            return advance();
        }
        if (cur_.k != token::kind::number) return err("expected an array length");
        node.shape = c::fixed_array;
        node.array_len = static_cast<std::size_t>(cur_.num);
        if (auto r = advance(); !r) return r;
        return expect_punct(']');
    }

    // ---- token plumbing ----

    result<void> advance() {
        auto t = lex_.next();
        if (!t) return t.err();
        cur_ = *t;
        return {};
    }

    bool at_punct(char c) const {
        return cur_.k == token::kind::punct && cur_.text[0] == c;
    }

    result<void> expect_punct(char c) {
        if (!at_punct(c)) return err(std::string("expected '") + c + "'");
        return advance();
    }

    result<void> expect_word(std::string_view w) {
        if (cur_.k != token::kind::word || cur_.text != w)
            return err("expected '" + std::string(w) + "'");
        return advance();
    }

    result<void> take_word(std::string& out, std::string_view what) {
        if (cur_.k != token::kind::word)
            return err("expected " + std::string(what));
        out = cur_.text;
        return advance();
    }

    result<void> take_number(std::uint64_t& out, std::uint64_t max, std::string_view what) {
        if (cur_.k != token::kind::number)
            return err("expected " + std::string(what));
        if (cur_.num > max)
            return error{errc::invalid_id,
                         std::string(what) + " " + cur_.text + " out of range"};
        out = cur_.num;
        return advance();
    }

    error err(std::string what) const {
        return {errc::parse_error,
                "interface file line " + std::to_string(cur_.line) + ": " + what};
    }

    error missing(std::string_view section) const {
        return {errc::missing_field,
                "interface file has no " + std::string(section) + " block"};
    }

    lexer lex_;
    token cur_;
};

} // namespace detail

/// Parses interface text back into ids plus the expanded type tree.
inline result<interface_doc> parse_interface(std::string_view text) {
    return detail::iface_parser(text).parse();
}

} // namespace somebridge::bridge

#endif // SOMEBRIDGE_BRIDGE_INTERFACE_FILE_HPP
