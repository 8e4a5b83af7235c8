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

#ifndef SOMEBRIDGE_CONFGEN_CONFGEN_HPP
#define SOMEBRIDGE_CONFGEN_CONFGEN_HPP

#include <string>

#include "somebridge/bridge/config.hpp"

namespace somebridge::confgen {

/// The full manual input set for one bridged interface: the ten
/// identification fields plus endpoint address, port, direction, and topic
/// name. The payload type is not a manual field; it comes from the message
/// file (or defaults to the raw-bytes schema).
struct generator_input {
    std::string interface_name;
    std::string method_name;
    std::string service_name;
    std::string package_name;
    std::uint8_t major_version = 0;
    std::uint32_t minor_version = 0;
    std::uint16_t service_id = 0;
    std::uint16_t instance_id = 0;
    std::uint16_t event_id = 0;
    std::uint16_t eventgroup_id = 0;

    std::string endpoint_address = "127.0.0.1";
    std::uint16_t endpoint_port = 0;
    schema::direction dir = schema::direction::bus_to_someip;
    std::string topic_name;

    std::string payload_type = "somebridge/RawBytes"; // canonical package/Name
};

inline constexpr int manual_input_count = 14;

struct generated_pair {
    std::string interface_text;
    std::string deployment_text;
};

namespace detail {

inline result<void> check_input(const generator_input& in) {
    const std::pair<const char*, std::uint16_t> ids[] = {
        {"service_id", in.service_id},
        {"instance_id", in.instance_id},
        {"event_id", in.event_id},
        {"eventgroup_id", in.eventgroup_id}};
    for (auto [field, v] : ids)
        if (v == 0) return error{errc::invalid_id, std::string(field) + " must be nonzero"};
    if (in.instance_id == someip::any_instance)
        return {errc::invalid_id, "instance_id 0xFFFF is reserved for finds"};

    const std::pair<const char*, const std::string*> names[] = {
        {"interface_name", &in.interface_name},
        {"method_name", &in.method_name},
        {"service_name", &in.service_name},
        {"package_name", &in.package_name}};
    for (auto [field, name] : names)
        if (!bridge::detail::valid_name(*name))
            return error{errc::invalid_config,
                         std::string(field) + " '" + *name + "' is not a valid identifier"};

    if (!net::parse_ipv4(in.endpoint_address))
        return {errc::invalid_config,
                "endpoint address '" + in.endpoint_address + "' is not an IPv4 literal"};
    if (in.endpoint_port == 0)
        return {errc::invalid_config, "endpoint port must be nonzero"};
    if (in.topic_name.empty())
        return {errc::invalid_config, "topic name must not be empty"};
    return {};
}

} // namespace detail

/// Renders the deployment JSON. Key order is fixed so generation is
/// byte-deterministic.
inline std::string emit_deployment(const generator_input& in) {
    nlohmann::ordered_json j;
    j["somebridge_deployment"] = bridge::deployment_format_version;
    j["service_name"] = in.service_name;
    j["package_name"] = in.package_name;
    j["interface_name"] = in.interface_name;
    j["method_name"] = in.method_name;
    j["service_id"] = in.service_id;
    j["instance_id"] = in.instance_id;
    j["event_id"] = in.event_id;
    j["eventgroup_id"] = in.eventgroup_id;
    j["major_version"] = in.major_version;
    j["minor_version"] = in.minor_version;
    j["direction"] = schema::direction_name(in.dir);
    j["topic"] = {{"name", in.topic_name}, {"type", in.payload_type}};
    j["endpoint"] = {{"address", in.endpoint_address}, {"port", in.endpoint_port}};
    return j.dump(2) + "\n";
}

/// Generates the interface + deployment pair for one input set. Pure:
/// identical inputs and schema bytes give identical output bytes.
inline result<generated_pair> generate(const generator_input& in,
                                       const schema::schema_registry& reg) {
    if (auto r = detail::check_input(in); !r) return r.err();
    auto root = bridge::expand_type(reg, in.payload_type);
    if (!root) return root.err();

    bridge::interface_doc doc;
    doc.ids.package_name = in.package_name;
    doc.ids.interface_name = in.interface_name;
    doc.ids.method_name = in.method_name;
    doc.ids.major_version = in.major_version;
    doc.ids.minor_version = in.minor_version;
    doc.ids.service_id = in.service_id;
    doc.ids.instance_id = in.instance_id;
    doc.ids.event_id = in.event_id;
    doc.ids.eventgroup_id = in.eventgroup_id;
    doc.ids.payload_type = in.payload_type;
    doc.root = std::move(*root);

    generated_pair out;
    out.interface_text = bridge::emit_interface(doc);
    out.deployment_text = emit_deployment(in);
    return out;
}

/// Line budget of one generated interface file, split into the part that is
/// the same for every message type and the part that mirrors the schema.
struct interface_measure {
    std::size_t fixed_lines = 0;
    std::size_t schema_lines = 0;
};

inline result<interface_measure> measure_interface(std::string_view interface_text) {
    auto doc = bridge::parse_interface(interface_text);
    if (!doc) return doc.err();
    interface_measure m;
    m.schema_lines = bridge::schema_section_lines(doc->root);
    std::size_t total = 0;
    for (char c : interface_text)
        if (c == '\n') ++total;
    m.fixed_lines = total - m.schema_lines;
    return m;
}

/// Re-checks a possibly edited pair. Every problem is a report entry; an
/// empty report means load_bridge_config would accept the files.
inline std::vector<bridge::finding> validate_pair(std::string_view interface_text,
                                                  std::string_view deployment_text,
                                                  const schema::schema_registry& reg) {
    std::vector<bridge::finding> out;
    auto doc = bridge::parse_interface(interface_text);
    if (!doc) out.push_back({doc.code(), "interface", doc.err().message});
    auto rc = bridge::parse_deployment(deployment_text);
    if (!rc) out.push_back({rc.code(), "deployment", rc.err().message});
    if (!doc || !rc) return out;
    return bridge::cross_validate(*doc, *rc, reg);
}

} // namespace somebridge::confgen

#endif // SOMEBRIDGE_CONFGEN_CONFGEN_HPP
