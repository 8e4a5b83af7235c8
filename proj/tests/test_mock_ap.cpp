#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <filesystem>
#include <thread>

#include "somebridge/bench/mock_ap.hpp"
#include "somebridge/bridge/driver.hpp"
#include "somebridge/schema/codec.hpp"
#include "somebridge/schema/parse.hpp"

using namespace somebridge;
using namespace somebridge::bench;

namespace {

schema::schema_registry make_registry() {
    auto reg =
        schema::load_schema_dir(std::filesystem::path(SOMEBRIDGE_REPO_DIR) / "schemas");
    REQUIRE(reg);
    return std::move(*reg);
}

bool wait_until(const std::function<bool()>& pred, duration_ns limit) {
    time_point deadline = steady_now() + limit;
    while (steady_now() < deadline) {
        if (pred()) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return pred();
}

mock_ap_config peer_config(std::uint16_t sd_port, std::uint16_t data_port,
                           std::uint16_t peer_sd_port) {
    mock_ap_config cfg;
    cfg.sd_bind = {net::loopback_ipv4, sd_port};
    cfg.data_bind = {net::loopback_ipv4, data_port};
    cfg.sd_peers = {{net::loopback_ipv4, peer_sd_port}};
    cfg.timings = someip::sd_timings::fast();
    cfg.send_interval = ms(10);
    cfg.payload_bytes = 32;
    cfg.recv_poll = ms(5);
    return cfg;
}

bridge::route_config raw_route(schema::direction dir, std::uint16_t data_port) {
    bridge::route_config rc;
    rc.dir = dir;
    rc.topic = {"/raw/bytes", "somebridge/RawBytes"};
    rc.service_id = 0x1234;
    rc.instance_id = 0x0001;
    rc.event_id = 0x0021;
    rc.eventgroup_id = 0x0103;
    rc.major_version = 1;
    rc.minor_version = 0;
    rc.interface_name = "RawBytes";
    rc.method_name = "send_raw";
    rc.service_name = "raw_bytes";
    rc.package_name = "demo";
    rc.endpoint = {net::loopback_ipv4, data_port};
    return rc;
}

/// Digest of the SOME/IP encoding of one bus-encoded RawBytes payload, for
/// comparison against the digests the mock peers log.
std::uint64_t someip_digest(const schema::schema_registry& reg, const byte_vec& bus_payload) {
    const auto* s = reg.find("somebridge/RawBytes");
    REQUIRE(s != nullptr);
    auto conv = schema::convert(reg, *s, bus_payload, schema::direction::bus_to_someip);
    REQUIRE(conv);
    return fnv1a64(*conv);
}

} // namespace

TEST_CASE("mock peers discover each other and exchange digest-logged notifications") {
    mock_ap_peer sender(mock_role::sender, peer_config(47650, 47652, 47651));
    mock_ap_peer receiver(mock_role::receiver, peer_config(47651, 47653, 47650));
    REQUIRE(sender.open());
    REQUIRE(receiver.open());

    std::atomic<bool> stop_sender{false}, stop_receiver{false};
    result<void> sender_res, receiver_res;
    std::thread st([&] { sender_res = sender.run(stop_sender); });
    std::thread rt([&] { receiver_res = receiver.run(stop_receiver); });

    REQUIRE(wait_until([&] { return receiver.subscribed(); }, seconds(3)));
    REQUIRE(wait_until([&] { return receiver.received() >= 5; }, seconds(3)));

    stop_sender = true;
    st.join();
    stop_receiver = true;
    rt.join();
    REQUIRE(sender_res);
    REQUIRE(receiver_res);

    CHECK(sender.has_subscribers());
    CHECK(receiver.rejected() == 0);
    auto sent = sender.digests();
    auto got = receiver.digests();
    REQUIRE(got.size() >= 5);
    REQUIRE(got.size() <= sent.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == sent[i]);
}

TEST_CASE("mock receiver exits with timeout when nothing offers the service") {
    auto cfg = peer_config(47654, 47655, 47656);
    cfg.discovery_timeout = ms(300);
    mock_ap_peer receiver(mock_role::receiver, cfg);
    REQUIRE(receiver.open());

    std::atomic<bool> stop{false};
    auto res = receiver.run(stop);
    REQUIRE_FALSE(res);
    CHECK(res.code() == errc::timeout);
}

TEST_CASE("mock sender feeds a bridge route through to the bus") {
    auto reg = make_registry();

    bus::topic_bus bus;
    bridge::driver_config dcfg;
    dcfg.sd_bind = {net::loopback_ipv4, 47660};
    dcfg.sd_peers = {{net::loopback_ipv4, 47661}};
    dcfg.timings = someip::sd_timings::fast();
    bridge::bridge_driver driver(bus, reg, dcfg);
    REQUIRE(driver.add_route(raw_route(schema::direction::someip_to_bus, 47662)));

    std::mutex m;
    std::vector<byte_vec> received;
    auto sub = bus.create_subscriber({"/raw/bytes", "somebridge/RawBytes"},
                                     [&](const bus::bus_sample& smp) {
                                         std::lock_guard lk(m);
                                         received.push_back(smp.payload);
                                     });
    REQUIRE(sub);
    REQUIRE(driver.start());

    mock_ap_peer sender(mock_role::sender, peer_config(47661, 47663, 47660));
    REQUIRE(sender.open());
    std::atomic<bool> stop{false};
    result<void> sender_res;
    std::thread st([&] { sender_res = sender.run(stop); });

    REQUIRE(wait_until(
        [&] {
            std::lock_guard lk(m);
            return received.size() >= 5;
        },
        seconds(5)));
    stop = true;
    st.join();
    REQUIRE(sender_res);
    driver.stop();

    auto sent = sender.digests();
    std::lock_guard lk(m);
    REQUIRE(received.size() <= sent.size());
    for (std::size_t i = 0; i < received.size(); ++i)
        CHECK(someip_digest(reg, received[i]) == sent[i]);
    CHECK(driver.counters(0).malformed == 0);
}

TEST_CASE("bridge route feeds a mock receiver from the bus") {
    auto reg = make_registry();

    bus::topic_bus bus;
    bridge::driver_config dcfg;
    dcfg.sd_bind = {net::loopback_ipv4, 47665};
    dcfg.sd_peers = {{net::loopback_ipv4, 47666}};
    dcfg.timings = someip::sd_timings::fast();
    bridge::bridge_driver driver(bus, reg, dcfg);
    REQUIRE(driver.add_route(raw_route(schema::direction::bus_to_someip, 47667)));
    REQUIRE(driver.start());

    auto cfg = peer_config(47666, 47668, 47665);
    mock_ap_peer receiver(mock_role::receiver, cfg);
    REQUIRE(receiver.open());
    std::atomic<bool> stop{false};
    result<void> receiver_res;
    std::thread rt([&] { receiver_res = receiver.run(stop); });

    REQUIRE(wait_until([&] { return receiver.subscribed(); }, seconds(5)));

    auto pub = bus.create_publisher({"/raw/bytes", "somebridge/RawBytes"});
    REQUIRE(pub);
    const auto* s = reg.find("somebridge/RawBytes");
    REQUIRE(s != nullptr);

    std::vector<std::uint64_t> expected;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        byte_vec blob(24);
        for (std::size_t i = 0; i < blob.size(); ++i)
            blob[i] = static_cast<std::uint8_t>(seed * 31 + i);
        auto bus_payload = schema::encode_bus(reg, *s, schema::value(schema::struct_value{
                                                           {schema::value(blob)}}));
        REQUIRE(bus_payload);
        expected.push_back(someip_digest(reg, *bus_payload));
        std::uint64_t want = receiver.received() + 1;
        REQUIRE(pub->publish(*bus_payload));
        REQUIRE(wait_until([&] { return receiver.received() >= want; }, seconds(3)));
    }

    stop = true;
    rt.join();
    REQUIRE(receiver_res);
    driver.stop();

    CHECK(receiver.rejected() == 0);
    auto got = receiver.digests();
    REQUIRE(got.size() >= expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(got[i] == expected[i]);
}
