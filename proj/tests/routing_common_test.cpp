#include <optional>

#include "doctest.h"
#include "manetsim/routing_common.hpp"

using namespace manet;

namespace {

Packet dataPacket(NodeId src, NodeId dst, std::uint64_t uid) {
    Packet p;
    p.kind = PacketKind::Data;
    p.src = src;
    p.dst = dst;
    p.uid = uid;
    p.payload = DataPayload{};
    return p;
}

} // namespace

TEST_CASE("expanding ring schedule walks 1,3,5,7 then three net-wide floods") {
    ErsSchedule ers;
    struct Expect {
        int attempt;
        int ttl;
        double waitS;
    };
    const Expect table[] = {
        {0, 1, 0.1}, {1, 3, 0.3}, {2, 5, 0.5}, {3, 7, 0.7},
        {4, 35, 3.5}, {5, 35, 3.5}, {6, 35, 3.5},
    };
    for (const auto& e : table) {
        auto ring = ers.next(e.attempt);
        REQUIRE(ring.has_value());
        CHECK(ring->ttl == e.ttl);
        CHECK(ring->waitS == doctest::Approx(e.waitS).epsilon(1e-12));
    }
    CHECK(!ers.next(7).has_value());
    CHECK(ers.ringedAttempts() == 4);
    CHECK(ers.totalAttempts() == 7);
}

TEST_CASE("send buffer expires entries exactly at the timeout") {
    SendBuffer buf(8, SimTime::fromSeconds(30.0));
    buf.push(dataPacket(0, 5, 1), SimTime::fromSeconds(0.0));

    CHECK(buf.takeExpired(SimTime::fromSeconds(29.999999)).empty());
    CHECK(buf.size() == 1);

    auto expired = buf.takeExpired(SimTime::fromSeconds(30.0));
    REQUIRE(expired.size() == 1);
    CHECK(expired[0].uid == 1);
    CHECK(buf.size() == 0);
}

TEST_CASE("send buffer evicts the oldest entry on overflow") {
    SendBuffer buf(2, SimTime::fromSeconds(30.0));
    CHECK(!buf.push(dataPacket(0, 5, 1), SimTime{}).has_value());
    CHECK(!buf.push(dataPacket(0, 5, 2), SimTime{}).has_value());
    auto evicted = buf.push(dataPacket(0, 5, 3), SimTime{});
    REQUIRE(evicted.has_value());
    CHECK(evicted->uid == 1);
    CHECK(buf.size() == 2);
}

TEST_CASE("send buffer hands back per-destination entries in FIFO order") {
    SendBuffer buf(8, SimTime::fromSeconds(30.0));
    buf.push(dataPacket(0, 5, 1), SimTime{});
    buf.push(dataPacket(0, 6, 2), SimTime{});
    buf.push(dataPacket(0, 5, 3), SimTime{});

    CHECK(buf.hasForDestination(5));
    CHECK(buf.hasForDestination(6));
    CHECK(!buf.hasForDestination(7));

    auto five = buf.takeForDestination(5);
    REQUIRE(five.size() == 2);
    CHECK(five[0].uid == 1);
    CHECK(five[1].uid == 3);
    CHECK(buf.size() == 1);
    CHECK(!buf.hasForDestination(5));
    CHECK(buf.hasForDestination(6));
}

TEST_CASE("duplicate cache suppresses within the horizon and forgets after it") {
    DuplicateCache seen(SimTime::fromSeconds(10.0));
    CHECK(!seen.isDuplicate(3, 7, SimTime::fromSeconds(1.0)));
    CHECK(seen.isDuplicate(3, 7, SimTime::fromSeconds(2.0)));
    CHECK(!seen.isDuplicate(4, 7, SimTime::fromSeconds(2.0)));
    CHECK(!seen.isDuplicate(3, 8, SimTime::fromSeconds(2.0)));
    // well past the horizon the same key counts as new again
    CHECK(!seen.isDuplicate(3, 7, SimTime::fromSeconds(12.5)));
}

TEST_CASE("hello monitor declares loss only after allowed-loss intervals of silence") {
    HelloMonitor mon;
    mon.heard(9, SimTime::fromSeconds(5.0));
    CHECK(!mon.lost(9, SimTime::fromSeconds(7.0)));
    CHECK(mon.lost(9, SimTime::fromSeconds(7.000001)));
    // a neighbor never heard from cannot be lost
    CHECK(!mon.lost(4, SimTime::fromSeconds(100.0)));
}

TEST_CASE("protocol names round-trip") {
    const Protocol all[] = {Protocol::Aodv, Protocol::AodvLl, Protocol::Dsr, Protocol::DsrM,
                            Protocol::Dymo};
    for (Protocol p : all) {
        auto back = protocolFromName(protocolName(p));
        REQUIRE(back.has_value());
        CHECK(*back == p);
    }
    CHECK(!protocolFromName("olsr").has_value());
}

TEST_CASE("control packet sizes feed the bit accounting") {
    ProtocolConfig cfg;
    CHECK(cfg.ctrlBits(PacketKind::Rreq) == 64 * 8);
    CHECK(cfg.ctrlBits(PacketKind::Rrep) == 64 * 8);
    CHECK(cfg.ctrlBits(PacketKind::Rerr) == 64 * 8);
    CHECK(cfg.ctrlBits(PacketKind::Hello) == 32 * 8);
    CHECK(cfg.dataBits() == (512 + 32) * 8);
}
