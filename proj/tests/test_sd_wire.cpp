#include <catch2/catch_amalgamated.hpp>

#include "somebridge/someip/sd_wire.hpp"

#include "gen.hpp"
#include "oracle_layout.hpp"

using namespace somebridge;
using namespace somebridge::someip;

namespace {

sd_message random_sd_message(gen::rng& g) {
    sd_message m;
    m.reboot_flag = gen::u32(g, 0, 1) == 1;
    m.session = gen::u16(g);
    std::size_t n = gen::u64(g, 0, 5);
    for (std::size_t i = 0; i < n; ++i) {
        sd_entry e;
        switch (gen::u32(g, 0, 3)) {
            case 0: e.type = sd_entry_type::find_service; break;
            case 1: e.type = sd_entry_type::offer_service; break;
            case 2: e.type = sd_entry_type::subscribe_eventgroup; break;
            default: e.type = sd_entry_type::subscribe_eventgroup_ack; break;
        }
        e.key = {gen::u16(g), gen::u16(g)};
        e.major_version = static_cast<std::uint8_t>(gen::u32(g, 0, 0xFF));
        e.minor_version = gen::u32(g, 0, 0xFFFFFFFF);
        e.ttl = gen::u32(g, 0, sd_max_ttl);
        if (e.is_subscribe_form()) e.eventgroup_id = gen::u16(g);
        if (gen::u32(g, 0, 1) == 1)
            e.endpoint = net::endpoint{gen::u32(g, 1, 0xFFFFFFFF),
                                       static_cast<std::uint16_t>(gen::u32(g, 1, 0xFFFF))};
        m.entries.push_back(e);
    }
    return m;
}

} // namespace

TEST_CASE("sd wire: single offer is the frozen 48-byte payload", "[sd]") {
    sd_message m;
    m.session = 1;
    m.entries.push_back(make_offer({0x1234, 0x0001}, 1, 0, 3,
                                   net::endpoint{net::loopback_ipv4, 40000}));

    auto encoded = encode_sd(m);
    REQUIRE(encoded.has_value());
    REQUIRE(encoded->size() == 48);

    const byte_vec golden = {
        0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x14, // head
        0x01, 0x00, 0x12, 0x34, 0x00, 0x01, 0x01, 0x00, // entry
        0x00, 0x03, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
        0x00, 0x00, 0x00, 0x00,
        0x00, 0x00, 0x00, 0x10,                         // options length
        0x04, 0x00, 0x00, 0x0C, 0x7F, 0x00, 0x00, 0x01, // ipv4/udp option
        0x9C, 0x40, 0x11, 0x00, 0x00, 0x00, 0x00, 0x00,
    };
    CHECK(*encoded == golden);

    oracle::sd_entry_fields f;
    f.type = 0x01;
    f.service_id = 0x1234;
    f.instance_id = 0x0001;
    f.major = 1;
    f.ttl = 3;
    f.has_endpoint = true;
    f.ipv4 = 0x7F000001;
    f.port = 40000;
    CHECK(oracle::sd_payload(false, 1, {f}) == golden);

    auto decoded = decode_sd(*encoded);
    REQUIRE(decoded.has_value());
    CHECK(decoded->msg == m);
    CHECK(decoded->malformed_entries == 0);
}

TEST_CASE("sd wire: random entry lists round trip", "[sd][property]") {
    gen::rng g{0x5eed0002};
    for (int i = 0; i < 300; ++i) {
        auto m = random_sd_message(g);
        auto encoded = encode_sd(m);
        REQUIRE(encoded.has_value());
        auto decoded = decode_sd(*encoded);
        REQUIRE(decoded.has_value());
        CHECK(decoded->msg == m);
        CHECK(decoded->malformed_entries == 0);
    }
}

TEST_CASE("sd wire: unknown entry type is skipped and counted", "[sd]") {
    sd_message m;
    m.session = 5;
    m.entries.push_back(make_find({0x0100, any_instance}, 1, 3));
    m.entries.push_back(make_offer({0x0200, 0x0001}, 1, 0, 3,
                                   net::endpoint{net::loopback_ipv4, 40001}));
    auto encoded = encode_sd(m).value();
    encoded[8 + 0] = 0x42; // corrupt first entry's type code

    auto decoded = decode_sd(encoded);
    REQUIRE(decoded.has_value());
    CHECK(decoded->malformed_entries == 1);
    REQUIRE(decoded->msg.entries.size() == 1);
    CHECK(decoded->msg.entries[0].key.service_id == 0x0200);
}

TEST_CASE("sd wire: dangling option reference is malformed", "[sd]") {
    sd_message m;
    m.entries.push_back(make_offer({0x0300, 0x0001}, 2, 1, 5,
                                   net::endpoint{net::loopback_ipv4, 40002}));
    auto encoded = encode_sd(m).value();
    encoded[8 + 1] = 0x07; // option index out of range

    auto decoded = decode_sd(encoded);
    REQUIRE(decoded.has_value());
    CHECK(decoded->malformed_entries == 1);
    CHECK(decoded->msg.entries.empty());
}

TEST_CASE("sd wire: structurally broken payloads are rejected", "[sd]") {
    CHECK(decode_sd(byte_vec{0, 0, 0}).code() == errc::malformed_entry);

    sd_message m;
    m.entries.push_back(make_find({1, 1}, 1, 3));
    auto encoded = encode_sd(m).value();
    SECTION("entries length beyond payload") {
        encoded[7] = 0xFF;
        CHECK(decode_sd(encoded).code() == errc::malformed_entry);
    }
    SECTION("entries length not a multiple of the entry size") {
        encoded[7] = 19;
        CHECK(decode_sd(encoded).code() == errc::malformed_entry);
    }
    SECTION("truncated options region") {
        encoded.resize(encoded.size() - 2);
        CHECK(decode_sd(encoded).code() == errc::malformed_entry);
    }
}

TEST_CASE("sd wire: carrier frame is a valid SOME/IP message", "[sd]") {
    sd_message m;
    m.session = 42;
    m.reboot_flag = true;
    m.entries.push_back(make_offer({0x1111, 0x0001}, 1, 0, 3,
                                   net::endpoint{net::loopback_ipv4, 40010}));

    auto frame = encode_sd_frame(m);
    REQUIRE(frame.has_value());
    auto decoded = decode_message(*frame);
    REQUIRE(decoded.has_value());
    CHECK(decoded->msg.header.service_id == sd_service_id);
    CHECK(decoded->msg.header.method_id == sd_method_id);
    CHECK(decoded->msg.header.session_id == 42);
    CHECK(decoded->msg.header.type == message_type::notification);
    CHECK(is_sd_message(decoded->msg));

    auto inner = decode_sd(decoded->msg.payload);
    REQUIRE(inner.has_value());
    CHECK(inner->msg == m);
}

TEST_CASE("sd wire: ttl beyond 24 bits is rejected on encode", "[sd]") {
    sd_message m;
    auto e = make_find({1, 1}, 1, 3);
    e.ttl = 0x1000000;
    m.entries.push_back(e);
    CHECK(encode_sd(m).code() == errc::malformed_entry);
}

TEST_CASE("sd wire: find/offer instance matching grid", "[sd]") {
    // Exact service match required; 0xFFFF in the find matches any instance.
    const std::uint16_t services[] = {0x1234, 0x1235};
    const std::uint16_t find_instances[] = {0x0001, 0x0002, any_instance};
    const std::uint16_t offer_instances[] = {0x0001, 0x0002};
    for (auto fs : services)
        for (auto fi : find_instances)
            for (auto os : services)
                for (auto oi : offer_instances) {
                    bool expected = fs == os && (fi == any_instance || fi == oi);
                    CHECK(key_matches({fs, fi}, {os, oi}) == expected);
                }
}
