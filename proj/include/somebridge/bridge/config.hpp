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

#ifndef SOMEBRIDGE_BRIDGE_CONFIG_HPP
#define SOMEBRIDGE_BRIDGE_CONFIG_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "somebridge/bridge/interface_file.hpp"
#include "somebridge/bus/bus.hpp"
#include "somebridge/net/endpoint.hpp"
#include "somebridge/schema/codec.hpp"
#include "somebridge/someip/sd_wire.hpp"

namespace somebridge::bridge {

/// Everything one bridged route needs: where it sits on the bus, how it
/// appears in service discovery, and where its data plane lives.
struct route_config {
    schema::direction dir = schema::direction::bus_to_someip;
    bus::topic topic;

    std::uint16_t service_id = 0;
    std::uint16_t instance_id = 0;
    std::uint16_t event_id = 0;
    std::uint16_t eventgroup_id = 0;
    std::uint8_t major_version = 0;
    std::uint32_t minor_version = 0;

    std::string interface_name;
    std::string method_name;
    std::string service_name;
    std::string package_name;

    net::endpoint endpoint; // data plane address of this side

    someip::service_key key() const { return {service_id, instance_id}; }

    /// The wire method field for this route's notifications.
    std::uint16_t wire_event_id() const {
        return static_cast<std::uint16_t>(event_id | someip::event_id_flag);
    }

    bool operator==(const route_config&) const = default;
};

/// One cross-validation discrepancy between the interface and deployment
/// files, or a defect in either one.
struct finding {
    errc code = errc::ok;
    std::string field;
    std::string detail;
};

namespace detail {

inline result<std::string> read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {errc::io_error, "cannot open " + path.string()};
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) return {errc::io_error, "read failed for " + path.string()};
    return std::move(buf).str();
}

inline bool valid_name(std::string_view s) {
    if (s.empty()) return false;
    if (std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

inline result<std::uint64_t> json_uint(const nlohmann::json& j, const char* key,
                                       std::uint64_t max) {
    if (!j.contains(key))
        return {errc::missing_field, std::string("deployment file has no ") + key};
    const auto& v = j.at(key);
    if (!v.is_number_unsigned())
        return {errc::parse_error, std::string(key) + " must be an unsigned number"};
    auto n = v.get<std::uint64_t>();
    if (n > max) return {errc::invalid_id, std::string(key) + " out of range"};
    return n;
}

inline result<std::string> json_string(const nlohmann::json& j, const char* key) {
    if (!j.contains(key))
        return {errc::missing_field, std::string("deployment file has no ") + key};
    const auto& v = j.at(key);
    if (!v.is_string())
        return {errc::parse_error, std::string(key) + " must be a string"};
    return v.get<std::string>();
}

} // namespace detail

inline constexpr int deployment_format_version = 1;

/// Parses the deployment JSON alone; cross-file checks live in
/// load_bridge_config.
inline result<route_config> parse_deployment(std::string_view text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded())
        return {errc::parse_error, "deployment file is not valid JSON"};
    if (!j.is_object())
        return {errc::parse_error, "deployment file must hold one JSON object"};

    auto version = detail::json_uint(j, "somebridge_deployment", 0xFFFF);
    if (!version) return version.err();
    if (*version != deployment_format_version)
        return {errc::invalid_config, "unsupported deployment format version"};

    route_config rc;
    auto sid = detail::json_uint(j, "service_id", 0xFFFF);
    auto iid = detail::json_uint(j, "instance_id", 0xFFFF);
    auto evid = detail::json_uint(j, "event_id", 0xFFFF);
    auto egid = detail::json_uint(j, "eventgroup_id", 0xFFFF);
    auto major = detail::json_uint(j, "major_version", 0xFF);
    auto minor = detail::json_uint(j, "minor_version", 0xFFFFFFFF);
    for (const auto* r : {&sid, &iid, &evid, &egid, &major, &minor})
        if (!*r) return r->err();
    rc.service_id = static_cast<std::uint16_t>(*sid);
    rc.instance_id = static_cast<std::uint16_t>(*iid);
    rc.event_id = static_cast<std::uint16_t>(*evid);
    rc.eventgroup_id = static_cast<std::uint16_t>(*egid);
    rc.major_version = static_cast<std::uint8_t>(*major);
    rc.minor_version = static_cast<std::uint32_t>(*minor);

    auto service_name = detail::json_string(j, "service_name");
    auto package_name = detail::json_string(j, "package_name");
    auto interface_name = detail::json_string(j, "interface_name");
    auto method_name = detail::json_string(j, "method_name");
    auto dir = detail::json_string(j, "direction");
    for (const auto* r : {&service_name, &package_name, &interface_name, &method_name, &dir})
        if (!*r) return r->err();
    rc.service_name = std::move(*service_name);
    rc.package_name = std::move(*package_name);
    rc.interface_name = std::move(*interface_name);
    rc.method_name = std::move(*method_name);

    if (*dir == "bus_to_someip") {
        rc.dir = schema::direction::bus_to_someip;
    } else if (*dir == "someip_to_bus") {
        rc.dir = schema::direction::someip_to_bus;
    } else {
        return {errc::invalid_config, "direction must be bus_to_someip or someip_to_bus"};
    }

    if (!j.contains("topic") || !j.at("topic").is_object())
        return {errc::missing_field, "deployment file has no topic object"};
    auto topic_name = detail::json_string(j.at("topic"), "name");
    auto topic_type = detail::json_string(j.at("topic"), "type");
    if (!topic_name) return topic_name.err();
    if (!topic_type) return topic_type.err();
    rc.topic = {std::move(*topic_name), std::move(*topic_type)};

    if (!j.contains("endpoint") || !j.at("endpoint").is_object())
        return {errc::missing_field, "deployment file has no endpoint object"};
    auto address = detail::json_string(j.at("endpoint"), "address");
    auto port = detail::json_uint(j.at("endpoint"), "port", 0xFFFF);
    if (!address) return address.err();
    if (!port) return port.err();
    auto parsed = net::parse_ipv4(*address);
    if (!parsed)
        return {errc::invalid_config,
                "endpoint address '" + *address + "' is not an IPv4 literal"};
    if (*port == 0) return {errc::invalid_config, "endpoint port must be nonzero"};
    rc.endpoint = {*parsed, static_cast<std::uint16_t>(*port)};

    const std::pair<const char*, std::uint16_t> id_fields[] = {
        {"service_id", rc.service_id},
        {"instance_id", rc.instance_id},
        {"event_id", rc.event_id},
        {"eventgroup_id", rc.eventgroup_id}};
    for (auto [field, v] : id_fields)
        if (v == 0) return error{errc::invalid_id, std::string(field) + " must be nonzero"};

    const std::pair<const char*, const std::string*> name_fields[] = {
        {"service_name", &rc.service_name},
        {"package_name", &rc.package_name},
        {"interface_name", &rc.interface_name},
        {"method_name", &rc.method_name}};
    for (auto [field, name] : name_fields)
        if (!detail::valid_name(*name))
            return error{errc::invalid_config,
                         std::string(field) + " '" + *name + "' is not a valid identifier"};

    return rc;
}

/// Every disagreement between the parsed interface file and the deployment,
/// plus staleness of the types section against the registry. Empty means
/// load_bridge_config would accept the pair.
inline std::vector<finding> cross_validate(const interface_doc& doc, const route_config& rc,
                                           const schema::schema_registry& reg) {
    std::vector<finding> out;
    auto mismatch = [&](const char* field, const std::string& iface_v,
                        const std::string& deploy_v) {
        out.push_back({errc::id_mismatch, field,
                       std::string("interface file says ") + iface_v + ", deployment says " +
                           deploy_v});
    };
    auto check_u = [&](const char* field, std::uint64_t a, std::uint64_t b) {
        if (a != b) mismatch(field, std::to_string(a), std::to_string(b));
    };
    auto check_s = [&](const char* field, const std::string& a, const std::string& b) {
        if (a != b) mismatch(field, "'" + a + "'", "'" + b + "'");
    };

    const auto& ids = doc.ids;
    check_s("package_name", ids.package_name, rc.package_name);
    check_s("interface_name", ids.interface_name, rc.interface_name);
    check_s("method_name", ids.method_name, rc.method_name);
    check_u("service_id", ids.service_id, rc.service_id);
    check_u("instance_id", ids.instance_id, rc.instance_id);
    check_u("event_id", ids.event_id, rc.event_id);
    check_u("eventgroup_id", ids.eventgroup_id, rc.eventgroup_id);
    check_u("major_version", ids.major_version, rc.major_version);
    check_u("minor_version", ids.minor_version, rc.minor_version);
    check_s("payload_type", ids.payload_type, rc.topic.type_name);

    auto expected = expand_type(reg, rc.topic.type_name);
    if (!expected) {
        out.push_back({errc::unknown_type, "topic.type", expected.err().message});
    } else if (ids.payload_type == rc.topic.type_name && !(doc.root == *expected)) {
        out.push_back({errc::invalid_config, "types",
                       "types section does not match the current schema, re-run confgen"});
    }
    return out;
}

/// Loads one route from its interface + deployment pair, enforcing that the
/// two files agree on every shared identification field.
inline result<route_config> load_bridge_config(std::string_view interface_text,
                                               std::string_view deployment_text,
                                               const schema::schema_registry& reg) {
    auto doc = parse_interface(interface_text);
    if (!doc) return doc.err();
    auto rc = parse_deployment(deployment_text);
    if (!rc) return rc.err();
    auto findings = cross_validate(*doc, *rc, reg);
    if (!findings.empty()) {
        const auto& f = findings.front();
        return error{f.code, f.field + ": " + f.detail};
    }
    return rc;
}

inline result<route_config> load_bridge_config_files(const std::filesystem::path& interface_path,
                                                     const std::filesystem::path& deployment_path,
                                                     const schema::schema_registry& reg) {
    auto iface = detail::read_text(interface_path);
    if (!iface) return iface.err();
    auto deploy = detail::read_text(deployment_path);
    if (!deploy) return deploy.err();
    return load_bridge_config(*iface, *deploy, reg);
}

} // namespace somebridge::bridge

#endif // SOMEBRIDGE_BRIDGE_CONFIG_HPP
