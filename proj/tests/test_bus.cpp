#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <mutex>
#include <thread>

#include "somebridge/bus/bus.hpp"
#include "somebridge/bus/udp_link.hpp"
#include "gen.hpp"

using namespace somebridge;
using namespace somebridge::bus;

namespace {

const topic points{"/sensing/points", "sensor_msgs/PointCloud2"};

bool wait_until(const std::function<bool()>& pred, duration_ns timeout = seconds(5)) {
    time_point deadline = steady_now() + timeout;
    while (steady_now() < deadline) {
        if (pred()) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    return pred();
}

/// Collects samples delivered to one subscriber.
struct collector {
    std::mutex m;
    std::vector<bus_sample> samples;

    subscriber_callback callback() {
        return [this](const bus_sample& s) {
            std::lock_guard lk(m);
            samples.push_back(s);
        };
    }
    std::size_t count() {
        std::lock_guard lk(m);
        return samples.size();
    }
    bus_sample at(std::size_t i) {
        std::lock_guard lk(m);
        return samples.at(i);
    }
};

/// Independent fragmentation oracle: how many frames a payload must produce.
std::size_t expected_frames(std::size_t payload_size) {
    std::size_t unit = 8 + payload_size;
    return (unit + 16384 - 1) / 16384;
}

} // namespace

TEST_CASE("bus: publish with no subscriber succeeds and delivers to none") {
    topic_bus bus;
    auto pub = bus.create_publisher(points);
    REQUIRE(pub);
    auto seq = pub->publish(byte_vec{1, 2, 3});
    REQUIRE(seq);
    CHECK(*seq == 1);
}

TEST_CASE("bus: fan-out delivers each sample to both subscribers once") {
    topic_bus bus;
    collector a, b;
    auto sa = bus.create_subscriber(points, a.callback());
    auto sb = bus.create_subscriber(points, b.callback());
    REQUIRE(sa);
    REQUIRE(sb);
    auto pub = bus.create_publisher(points);
    REQUIRE(pub);
    REQUIRE(pub->publish(byte_vec{0xAA}));
    REQUIRE(pub->publish(byte_vec{0xBB}));
    CHECK(a.count() == 2);
    CHECK(b.count() == 2);
    CHECK(a.at(0).payload == byte_vec{0xAA});
    CHECK(b.at(1).payload == byte_vec{0xBB});
}

TEST_CASE("bus: same topic name with a different type is a type mismatch") {
    topic_bus bus;
    REQUIRE(bus.create_publisher(points));
    auto bad_sub = bus.create_subscriber({points.name, "std_msgs/Header"},
                                         [](const bus_sample&) {});
    REQUIRE_FALSE(bad_sub);
    CHECK(bad_sub.code() == errc::type_mismatch);
    auto bad_pub = bus.create_publisher({points.name, "std_msgs/Header"});
    REQUIRE_FALSE(bad_pub);
    CHECK(bad_pub.code() == errc::type_mismatch);
}

TEST_CASE("bus: per-publisher sequence numbers are 1,2,3 in delivery order") {
    topic_bus bus;
    collector c;
    auto sub = bus.create_subscriber(points, c.callback());
    auto pub = bus.create_publisher(points);
    REQUIRE(pub);
    for (int i = 0; i < 3; ++i) REQUIRE(pub->publish(byte_vec{std::uint8_t(i)}));
    REQUIRE(c.count() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(c.at(i).sequence == i + 1);
        CHECK(c.at(i).payload == byte_vec{std::uint8_t(i)});
    }
}

TEST_CASE("bus: publish after close fails with BusClosed") {
    topic_bus bus;
    auto pub = bus.create_publisher(points);
    REQUIRE(pub);
    bus.close();
    auto r = pub->publish(byte_vec{1});
    REQUIRE_FALSE(r);
    CHECK(r.code() == errc::bus_closed);
    auto sub = bus.create_subscriber(points, [](const bus_sample&) {});
    REQUIRE_FALSE(sub);
    CHECK(sub.code() == errc::bus_closed);
}

TEST_CASE("bus: publisher state is unchanged by subscriber churn") {
    topic_bus bus;
    auto pub = bus.create_publisher(points);
    REQUIRE(pub);
    auto id_before = pub->id();
    auto topic_before = pub->topic_of();
    REQUIRE(*pub->publish(byte_vec{1}) == 1);

    collector c;
    {
        auto sub = bus.create_subscriber(points, c.callback());
        REQUIRE(sub);
        REQUIRE(*pub->publish(byte_vec{2}) == 2);
    } // subscriber removed again

    REQUIRE(*pub->publish(byte_vec{3}) == 3);
    CHECK(pub->id() == id_before);
    CHECK(pub->topic_of() == topic_before);
    CHECK(c.count() == 1); // volatile durability: only the sample while subscribed
    CHECK(c.at(0).payload == byte_vec{2});
}

TEST_CASE("bus: per-publisher FIFO holds under concurrent publishers") {
    topic_bus bus;
    constexpr int per_thread = 400;

    std::mutex m;
    std::map<std::uint16_t, std::uint64_t> last_seq;
    std::atomic<int> concurrent{0};
    bool overlapped = false;
    auto sub = bus.create_subscriber(points, [&](const bus_sample& s) {
        if (concurrent.fetch_add(1) != 0) overlapped = true;
        {
            std::lock_guard lk(m);
            auto [it, fresh] = last_seq.try_emplace(s.publisher_id, 0);
            REQUIRE(s.sequence == it->second + 1);
            it->second = s.sequence;
        }
        concurrent.fetch_sub(1);
    });
    REQUIRE(sub);

    auto worker = [&] {
        auto pub = bus.create_publisher(points);
        REQUIRE(pub);
        for (int i = 0; i < per_thread; ++i) REQUIRE(pub->publish(byte_vec{7}));
    };
    std::thread t1(worker), t2(worker), t3(worker);
    t1.join();
    t2.join();
    t3.join();

    std::lock_guard lk(m);
    REQUIRE(last_seq.size() == 3);
    for (const auto& [id, seq] : last_seq) CHECK(seq == per_thread);
    CHECK_FALSE(overlapped); // one dispatch context per subscriber
}

TEST_CASE("bus wire: fragment header matches the documented layout") {
    fragment_header h;
    h.topic_hash = 0x11223344;
    h.publisher_id = 0x0102;
    h.sample_seq = 0x0A0B0C0D;
    h.frag_index = 2;
    h.frag_count = 7;

    byte_vec out;
    byte_writer w(out);
    encode_fragment_header(h, w);
    byte_vec expect = {0x11, 0x22, 0x33, 0x44, 0x01, 0x02, 0x01, 0x00,
                       0x0A, 0x0B, 0x0C, 0x0D, 0x00, 0x02, 0x00, 0x07};
    REQUIRE(out == expect);

    byte_reader r(out);
    auto back = decode_fragment_header(r);
    REQUIRE(back.has_value());
    CHECK(back->topic_hash == h.topic_hash);
    CHECK(back->publisher_id == h.publisher_id);
    CHECK(back->version == bus_wire_version);
    CHECK(back->sample_seq == h.sample_seq);
    CHECK(back->frag_index == h.frag_index);
    CHECK(back->frag_count == h.frag_count);
}

TEST_CASE("bus udp: samples cross the loopback link byte-identical") {
    topic_bus bus_a, bus_b;
    udp_link link_a(bus_a, {});
    udp_link link_b(bus_b, {});
    REQUIRE(link_a.start());
    REQUIRE(link_b.start());
    link_a.add_peer(link_b.local_endpoint());
    REQUIRE(link_a.export_topic(points));
    REQUIRE(link_b.import_topic(points));

    collector c;
    auto sub = bus_b.create_subscriber(points, c.callback());
    REQUIRE(sub);
    auto pub = bus_a.create_publisher(points);
    REQUIRE(pub);

    SECTION("small payload in a single fragment") {
        byte_vec payload = {1, 2, 3, 4, 5};
        REQUIRE(pub->publish(payload));
        REQUIRE(wait_until([&] { return c.count() >= 1; }));
        auto got = c.at(0);
        CHECK(got.payload == payload);
        CHECK(got.publish_time > 0);
        CHECK(link_a.stats().sent_frames == expected_frames(payload.size()));
        CHECK(link_b.stats().lost_samples == 0);
    }

    SECTION("1 MiB payload is fragmented and reassembled") {
        gen::rng rng(0xfeedbeef);
        byte_vec payload = gen::blob(rng, 1 << 20);
        REQUIRE(pub->publish(payload));
        REQUIRE(wait_until([&] { return c.count() >= 1; }));
        auto got = c.at(0);
        REQUIRE(got.payload.size() == payload.size());
        CHECK(got.payload == payload);
        CHECK(link_a.stats().sent_frames == expected_frames(payload.size()));
        CHECK(expected_frames(payload.size()) == 65); // 8-byte prelude tips it to 65
        CHECK(link_b.stats().lost_samples == 0);
    }

    SECTION("origin publish timestamp rides the prelude") {
        REQUIRE(pub->publish_with_time(byte_vec{9}, 123456789));
        REQUIRE(wait_until([&] { return c.count() >= 1; }));
        CHECK(c.at(0).publish_time == 123456789);
    }

    link_a.stop();
    link_b.stop();
}

TEST_CASE("bus udp: in-process and udp delivery see the same bytes") {
    topic_bus bus_a, bus_b;
    udp_link link_a(bus_a, {});
    udp_link link_b(bus_b, {});
    REQUIRE(link_a.start());
    REQUIRE(link_b.start());
    link_a.add_peer(link_b.local_endpoint());
    REQUIRE(link_a.export_topic(points));
    REQUIRE(link_b.import_topic(points));

    collector local_c, remote_c;
    auto local_sub = bus_a.create_subscriber(points, local_c.callback());
    auto remote_sub = bus_b.create_subscriber(points, remote_c.callback());
    auto pub = bus_a.create_publisher(points);
    REQUIRE(pub);

    gen::rng rng(42);
    for (int i = 0; i < 5; ++i) REQUIRE(pub->publish(gen::blob(rng, 1000 * (i + 1))));
    REQUIRE(wait_until([&] { return remote_c.count() >= 5; }));
    REQUIRE(local_c.count() == 5);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(local_c.at(i).payload == remote_c.at(i).payload);

    link_a.stop();
    link_b.stop();
}

TEST_CASE("bus udp: sequence gaps and abandoned units are counted as losses") {
    topic_bus bus_b;
    udp_link link_b(bus_b, {});
    REQUIRE(link_b.start());
    REQUIRE(link_b.import_topic(points));

    collector c;
    auto sub = bus_b.create_subscriber(points, c.callback());
    REQUIRE(sub);

    auto sender = net::udp_socket::bind({net::loopback_ipv4, 0});
    REQUIRE(sender);
    auto dest = link_b.local_endpoint();
    std::uint32_t hash = topic_hash(points);

    auto send_unit = [&](std::uint32_t seq, byte_span payload,
                         std::uint16_t frag_count, std::uint16_t only_frag) {
        byte_vec unit;
        byte_writer uw(unit);
        uw.u64_be(777);
        uw.raw(payload);
        for (std::uint16_t i = 0; i < frag_count; ++i) {
            if (only_frag != 0xFFFF && i != only_frag) continue;
            byte_vec frame;
            byte_writer w(frame);
            fragment_header h;
            h.topic_hash = hash;
            h.publisher_id = 50;
            h.sample_seq = seq;
            h.frag_index = i;
            h.frag_count = frag_count;
            encode_fragment_header(h, w);
            std::size_t off = std::size_t(i) * fragment_chunk;
            std::size_t len = std::min(fragment_chunk, unit.size() - off);
            w.raw(byte_span(unit).subspan(off, len));
            REQUIRE(sender->send_to(frame, dest));
        }
    };

    send_unit(1, byte_vec{1}, 1, 0xFFFF);
    REQUIRE(wait_until([&] { return c.count() >= 1; }));

    // a gap: seq 2 never sent
    send_unit(3, byte_vec{3}, 1, 0xFFFF);
    REQUIRE(wait_until([&] { return c.count() >= 2; }));
    CHECK(link_b.stats().lost_samples == 1);

    // an abandoned unit: first fragment of seq 4, then all of seq 5
    byte_vec big(fragment_chunk * 2, 0x5A);
    send_unit(4, big, 3, 0);
    send_unit(5, byte_vec{5}, 1, 0xFFFF);
    REQUIRE(wait_until([&] { return c.count() >= 3; }));
    CHECK(link_b.stats().lost_samples == 2);
    CHECK(c.at(2).payload == byte_vec{5});

    link_b.stop();
}

TEST_CASE("bus udp: malformed frames are counted and ignored") {
    topic_bus bus_b;
    udp_link link_b(bus_b, {});
    REQUIRE(link_b.start());
    REQUIRE(link_b.import_topic(points));

    collector c;
    auto sub = bus_b.create_subscriber(points, c.callback());
    auto sender = net::udp_socket::bind({net::loopback_ipv4, 0});
    REQUIRE(sender);
    auto dest = link_b.local_endpoint();

    // too short for a header
    REQUIRE(sender->send_to(byte_vec{1, 2, 3}, dest));
    // wrong version
    byte_vec frame;
    byte_writer w(frame);
    fragment_header h;
    h.topic_hash = topic_hash(points);
    h.frag_count = 1;
    encode_fragment_header(h, w);
    frame[6] = 0x7F;
    frame.push_back(0);
    REQUIRE(sender->send_to(frame, dest));
    // unknown topic hash
    byte_vec frame2;
    byte_writer w2(frame2);
    fragment_header h2;
    h2.topic_hash = 0xDEADBEEF;
    h2.frag_count = 1;
    encode_fragment_header(h2, w2);
    frame2.push_back(0);
    REQUIRE(sender->send_to(frame2, dest));

    REQUIRE(wait_until([&] { return link_b.stats().bad_frames >= 3; }));
    CHECK(link_b.stats().received_frames >= 3);
    CHECK(c.count() == 0);
    link_b.stop();
}
