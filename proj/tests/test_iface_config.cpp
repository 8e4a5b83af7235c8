#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "somebridge/bridge/config.hpp"
#include "somebridge/schema/parse.hpp"

using namespace somebridge;
using namespace somebridge::bridge;

namespace {

const std::filesystem::path schema_root = std::filesystem::path(SOMEBRIDGE_REPO_DIR) / "schemas";

schema::schema_registry make_registry() {
    auto reg = schema::load_schema_dir(schema_root);
    REQUIRE(reg);
    return std::move(*reg);
}

iface_ids point_ids() {
    iface_ids ids;
    ids.package_name = "demo";
    ids.interface_name = "PointSender";
    ids.method_name = "send_point";
    ids.major_version = 1;
    ids.minor_version = 0;
    ids.service_id = 0x1234;
    ids.instance_id = 0x0001;
    ids.event_id = 0x0001;
    ids.eventgroup_id = 0x0100;
    ids.payload_type = "geometry_msgs/Point";
    return ids;
}

// Hand-written rendering of the Point interface, kept in sync with the
// grammar reference. emit_interface must reproduce it byte for byte.
const char* point_interface_text =
    "// somebridge interface definition, generated by confgen\n"
    "// edit the generator inputs and re-run instead of patching this file\n"
    "package demo\n"
    "\n"
    "interface PointSender {\n"
    "    version { major 1 minor 0 }\n"
    "    service { id 0x1234 instance 0x0001 }\n"
    "\n"
    "    broadcast send_point {\n"
    "        eventgroup 0x0100\n"
    "        event 0x0001\n"
    "        out {\n"
    "            geometry_msgs.Point data\n"
    "        }\n"
    "    }\n"
    "\n"
    "    types {\n"
    "        struct geometry_msgs.Point {\n"
    "            float64 x\n"
    "            float64 y\n"
    "            float64 z\n"
    "        }\n"
    "    }\n"
    "}\n";

std::string point_deployment_text() {
    return R"({
  "somebridge_deployment": 1,
  "service_name": "point_sender",
  "package_name": "demo",
  "interface_name": "PointSender",
  "method_name": "send_point",
  "service_id": 4660,
  "instance_id": 1,
  "event_id": 1,
  "eventgroup_id": 256,
  "major_version": 1,
  "minor_version": 0,
  "direction": "bus_to_someip",
  "topic": { "name": "/demo/point", "type": "geometry_msgs/Point" },
  "endpoint": { "address": "127.0.0.1", "port": 40000 }
}
)";
}

} // namespace

TEST_CASE("interface emission matches the hand-written Point rendering") {
    auto reg = make_registry();
    interface_doc doc;
    doc.ids = point_ids();
    auto root = expand_type(reg, "geometry_msgs/Point");
    REQUIRE(root);
    doc.root = std::move(*root);

    CHECK(emit_interface(doc) == point_interface_text);
}

TEST_CASE("interface text parses back to the document that emitted it") {
    auto reg = make_registry();
    for (const char* type : {"geometry_msgs/Point", "sensor_msgs/NavSatFix",
                             "sensor_msgs/PointCloud2", "tf2_msgs/TFMessage",
                             "autoware_msgs/Waypoint", "somebridge/RawBytes"}) {
        interface_doc doc;
        doc.ids = point_ids();
        doc.ids.payload_type = type;
        auto root = expand_type(reg, type);
        REQUIRE(root);
        doc.root = std::move(*root);

        auto parsed = parse_interface(emit_interface(doc));
        REQUIRE(parsed);
        CHECK(parsed->ids == doc.ids);
        CHECK(parsed->root == doc.root);
    }
}

TEST_CASE("expanded tree inlines nested message fields") {
    auto reg = make_registry();
    auto root = expand_type(reg, "geometry_msgs/PoseStamped");
    REQUIRE(root);
    REQUIRE(root->is_block);
    REQUIRE(root->members.size() == 2);
    CHECK(root->members[0].field_name == "header");
    CHECK(root->members[0].is_block);
    CHECK(root->members[0].type_name == "std_msgs/Header");
    CHECK(root->members[0].members.size() == 2);
    CHECK(root->members[1].field_name == "pose");
    CHECK(root->members[1].members.size() == 2);

    CHECK(!expand_type(reg, "demo/NoSuchType"));
}

TEST_CASE("schema section line counts: leaves cost one, blocks cost braces plus members") {
    auto reg = make_registry();

    type_node leaf;
    CHECK(schema_section_lines(leaf) == 1);

    auto point = expand_type(reg, "geometry_msgs/Point");
    REQUIRE(point);
    CHECK(schema_section_lines(*point) == 5);

    // The block's own lines appear in the rendered text exactly.
    interface_doc doc;
    doc.ids = point_ids();
    doc.root = *point;
    auto text = emit_interface(doc);
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    CHECK(lines == 19 + schema_section_lines(*point));
}

TEST_CASE("interface parse errors carry the offending line") {
    SECTION("missing version block") {
        std::string text = "package demo\ninterface X {\n"
                           "    service { id 0x1 instance 0x1 }\n"
                           "    broadcast m { eventgroup 0x1 event 0x1 out { demo.T data } }\n"
                           "    types { struct demo.T { uint8 a } }\n}\n";
        auto r = parse_interface(text);
        REQUIRE(!r);
        CHECK(r.code() == errc::missing_field);
        CHECK(r.err().message.find("version") != std::string::npos);
    }
    SECTION("service id out of range") {
        std::string text = "package demo\ninterface X {\n"
                           "    version { major 1 minor 0 }\n"
                           "    service { id 0x10000 instance 0x1 }\n}\n";
        auto r = parse_interface(text);
        REQUIRE(!r);
        CHECK(r.code() == errc::invalid_id);
    }
    SECTION("unknown primitive") {
        std::string text = "package demo\ninterface X {\n"
                           "    version { major 1 minor 0 }\n"
                           "    service { id 0x1 instance 0x1 }\n"
                           "    broadcast m { eventgroup 0x1 event 0x1 out { demo.T data } }\n"
                           "    types { struct demo.T {\n        quaternion128 q\n    } }\n}\n";
        auto r = parse_interface(text);
        REQUIRE(!r);
        CHECK(r.code() == errc::parse_error);
        CHECK(r.err().message.find("line 7") != std::string::npos);
        CHECK(r.err().message.find("quaternion128") != std::string::npos);
    }
    SECTION("trailing content after the interface block") {
        std::string text = std::string(point_interface_text) + "interface Y {}\n";
        auto r = parse_interface(text);
        REQUIRE(!r);
        CHECK(r.code() == errc::parse_error);
    }
    SECTION("comments and odd spacing are accepted") {
        std::string text = point_interface_text;
        text.insert(text.find("types"), "// layout below\n    ");
        CHECK(parse_interface(text));
    }
}

TEST_CASE("deployment JSON parses into a route config") {
    auto rc = parse_deployment(point_deployment_text());
    REQUIRE(rc);
    CHECK(rc->dir == schema::direction::bus_to_someip);
    CHECK(rc->topic.name == "/demo/point");
    CHECK(rc->topic.type_name == "geometry_msgs/Point");
    CHECK(rc->service_id == 0x1234);
    CHECK(rc->instance_id == 0x0001);
    CHECK(rc->event_id == 0x0001);
    CHECK(rc->eventgroup_id == 0x0100);
    CHECK(rc->major_version == 1);
    CHECK(rc->minor_version == 0);
    CHECK(rc->service_name == "point_sender");
    CHECK(rc->package_name == "demo");
    CHECK(rc->interface_name == "PointSender");
    CHECK(rc->method_name == "send_point");
    CHECK(rc->endpoint == *net::parse_endpoint("127.0.0.1:40000"));
    CHECK(rc->key() == someip::service_key{0x1234, 0x0001});
    CHECK(rc->wire_event_id() == 0x8001);
}

TEST_CASE("deployment defects are rejected one by one") {
    auto patched = [](std::string_view needle, std::string_view replacement) {
        std::string text = point_deployment_text();
        auto pos = text.find(needle);
        REQUIRE(pos != std::string::npos);
        text.replace(pos, needle.size(), replacement);
        return text;
    };

    CHECK(parse_deployment("not json").code() == errc::parse_error);
    CHECK(parse_deployment("[1, 2]").code() == errc::parse_error);
    CHECK(parse_deployment(
              patched("\"somebridge_deployment\": 1", "\"somebridge_deployment\": 9"))
              .code() == errc::invalid_config);
    CHECK(parse_deployment(patched("\"service_id\": 4660,", "")).code() == errc::missing_field);
    CHECK(parse_deployment(patched("\"service_id\": 4660", "\"service_id\": 0")).code() ==
          errc::invalid_id);
    CHECK(parse_deployment(patched("\"service_id\": 4660", "\"service_id\": 99999")).code() ==
          errc::invalid_id);
    CHECK(parse_deployment(patched("\"service_id\": 4660", "\"service_id\": \"0x1234\"")).code() ==
          errc::parse_error);
    CHECK(parse_deployment(patched("bus_to_someip", "sideways")).code() == errc::invalid_config);
    CHECK(parse_deployment(patched("\"port\": 40000", "\"port\": 0")).code() ==
          errc::invalid_config);
    CHECK(parse_deployment(patched("127.0.0.1", "localhost")).code() == errc::invalid_config);
    CHECK(parse_deployment(patched("\"package_name\": \"demo\"", "\"package_name\": \"9lives\""))
              .code() == errc::invalid_config);
    CHECK(parse_deployment(patched("\"endpoint\": { \"address\": \"127.0.0.1\", \"port\": 40000 }",
                                   "\"endpoint\": 7"))
              .code() == errc::missing_field);
}

TEST_CASE("cross validation flags every divergent field") {
    auto reg = make_registry();
    auto root = expand_type(reg, "geometry_msgs/Point");
    REQUIRE(root);
    interface_doc doc{point_ids(), *root};
    auto rc = parse_deployment(point_deployment_text());
    REQUIRE(rc);

    CHECK(cross_validate(doc, *rc, reg).empty());

    SECTION("each identification field is compared") {
        struct edit {
            const char* field;
            void (*apply)(route_config&);
        };
        const edit edits[] = {
            {"package_name", [](route_config& r) { r.package_name = "other"; }},
            {"interface_name", [](route_config& r) { r.interface_name = "Other"; }},
            {"method_name", [](route_config& r) { r.method_name = "other"; }},
            {"service_id", [](route_config& r) { r.service_id = 0x4321; }},
            {"instance_id", [](route_config& r) { r.instance_id = 2; }},
            {"event_id", [](route_config& r) { r.event_id = 2; }},
            {"eventgroup_id", [](route_config& r) { r.eventgroup_id = 2; }},
            {"major_version", [](route_config& r) { r.major_version = 9; }},
            {"minor_version", [](route_config& r) { r.minor_version = 9; }},
            {"payload_type", [](route_config& r) { r.topic.type_name = "geometry_msgs/Pose"; }},
        };
        for (const auto& e : edits) {
            route_config tampered = *rc;
            e.apply(tampered);
            auto findings = cross_validate(doc, tampered, reg);
            REQUIRE(!findings.empty());
            CHECK(findings.front().field == e.field);
            CHECK(findings.front().detail.find("interface file says") != std::string::npos);
        }
    }

    SECTION("stale types section against the live registry") {
        interface_doc stale = doc;
        stale.root.members.pop_back();
        auto findings = cross_validate(stale, *rc, reg);
        REQUIRE(findings.size() == 1);
        CHECK(findings.front().field == "types");
        CHECK(findings.front().code == errc::invalid_config);
        CHECK(findings.front().detail.find("re-run confgen") != std::string::npos);
    }

    SECTION("unknown topic type") {
        route_config tampered = *rc;
        tampered.topic.type_name = "demo/Missing";
        auto findings = cross_validate(doc, tampered, reg);
        bool saw_unknown = false;
        for (const auto& f : findings) saw_unknown |= f.code == errc::unknown_type;
        CHECK(saw_unknown);
    }
}

TEST_CASE("load_bridge_config accepts the matching pair and rejects a tampered one") {
    auto reg = make_registry();
    auto rc = load_bridge_config(point_interface_text, point_deployment_text(), reg);
    REQUIRE(rc);
    CHECK(rc->topic.name == "/demo/point");

    std::string tampered = point_deployment_text();
    auto pos = tampered.find("4660");
    tampered.replace(pos, 4, "4661");
    auto bad = load_bridge_config(point_interface_text, tampered, reg);
    REQUIRE(!bad);
    CHECK(bad.code() == errc::id_mismatch);
    CHECK(bad.err().message.find("service_id") != std::string::npos);
}

TEST_CASE("load_bridge_config_files reads from disk") {
    auto reg = make_registry();
    auto dir = std::filesystem::temp_directory_path() / "somebridge_cfg_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "point.sbif") << point_interface_text;
        std::ofstream(dir / "point.json") << point_deployment_text();
    }
    auto rc = load_bridge_config_files(dir / "point.sbif", dir / "point.json", reg);
    REQUIRE(rc);
    CHECK(rc->service_id == 0x1234);

    auto missing = load_bridge_config_files(dir / "absent.sbif", dir / "point.json", reg);
    REQUIRE(!missing);
    CHECK(missing.code() == errc::io_error);
    std::filesystem::remove_all(dir);
}
