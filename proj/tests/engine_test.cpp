#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "manetsim/analytics.hpp"
#include "manetsim/engine.hpp"
#include "manetsim/event_queue.hpp"
#include "test_support.hpp"

using namespace manet;
using test_support::lineTopology;
using test_support::placedTopology;
using test_support::scriptScenario;

namespace {

Packet rawData(Simulation& sim, NodeId src, NodeId dst) {
    Packet p;
    p.kind = PacketKind::Data;
    p.src = src;
    p.dst = dst;
    p.ttl = 35;
    p.sizeBits = sim.protocolConfig().dataBits();
    p.uid = sim.nextPacketUid();
    p.payload = DataPayload{};
    return p;
}

/// First event-log line containing the needle, parsed for its timestamp.
std::optional<double> firstEventTimeS(const std::string& log, const std::string& needle) {
    std::istringstream in(log);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find(needle) == std::string::npos) {
            continue;
        }
        return std::stod(line.substr(0, line.find('\t'))) / 1e6;
    }
    return std::nullopt;
}

} // namespace

TEST_CASE("event queue pops by time, then by scheduling order") {
    EventQueue q;
    std::vector<int> order;
    q.schedule(SimTime::fromSeconds(2.0), [&] { order.push_back(3); });
    q.schedule(SimTime::fromSeconds(1.0), [&] { order.push_back(1); });
    q.schedule(SimTime::fromSeconds(1.0), [&] { order.push_back(2); });
    q.schedule(SimTime::fromSeconds(3.0), [&] { order.push_back(4); });
    while (!q.empty()) {
        q.pop()();
    }
    CHECK(order == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("unit disk range is inclusive at exactly 250 m") {
    auto sc = scriptScenario(Protocol::Aodv, 2, 1.0);

    Simulation at250(sc, placedTopology({{0.0, 0.0}, {250.0, 0.0}}));
    CHECK(at250.inRange(0, 1, SimTime{}));
    CHECK(at250.neighborsOf(0, SimTime{}) == std::vector<NodeId>{1});
    CHECK(at250.neighborsOf(1, SimTime{}) == std::vector<NodeId>{0});
    CHECK(!at250.inRange(0, 0, SimTime{})); // a node is not its own neighbor

    Simulation past(sc, placedTopology({{0.0, 0.0}, {250.01, 0.0}}));
    CHECK(!past.inRange(0, 1, SimTime{}));
    CHECK(past.neighborsOf(0, SimTime{}).empty());
}

TEST_CASE("neighbor sets are symmetric on a random layout") {
    Scenario sc;
    sc.protocol = Protocol::Aodv;
    sc.nodes = 30;
    sc.flows = 0;
    sc.durationS = 1.0;
    sc.seed = 11;
    Simulation sim(sc);
    for (NodeId a = 0; a < sc.nodes; ++a) {
        for (NodeId b : sim.neighborsOf(a, SimTime{})) {
            auto back = sim.neighborsOf(b, SimTime{});
            CHECK(std::find(back.begin(), back.end(), a) != back.end());
        }
    }
}

TEST_CASE("a 4096-bit frame occupies the 2 Mb/s channel for exactly 2048 us") {
    auto sc = scriptScenario(Protocol::Aodv, 2, 5.0);
    sc.packetBytes = 480; // 480 + 32 header = 512 bytes = 4096 bits
    Simulation sim(sc, placedTopology({{0.0, 0.0}, {100.0, 0.0}}));
    sim.injectData(SimTime::fromSeconds(1.0), 0, 1);
    sim.run();

    bool sawData = false;
    for (const auto& r : sim.txRecords()) {
        if (r.kind == PacketKind::Data) {
            sawData = true;
            CHECK((r.end - r.start).us == 2048);
        }
        if (r.kind == PacketKind::Rreq) {
            CHECK((r.end - r.start).us == 256); // 64 bytes
        }
    }
    CHECK(sawData);
    CHECK(sim.stats().dataDelivered == 1);
}

TEST_CASE("a saturated sender fills exactly the channel budget in the first second") {
    auto sc = scriptScenario(Protocol::Aodv, 2, 10.0);
    sc.packetBytes = 480;
    Simulation sim(sc, placedTopology({{0.0, 0.0}, {100.0, 0.0}}));
    for (int i = 0; i < 600; ++i) {
        sim.sendUnicast(0, 1, rawData(sim, 0, 1));
    }
    sim.run();

    const TraceStats& ts = sim.stats();
    CHECK(ts.dataDelivered == 600);

    // 488 frames of 2048 us complete within [0, 1 s); the 489th straddles
    // the bin edge and contributes its 576 us prefix: 488 * 4096 + 1152.
    std::size_t inFirstSecond = 0;
    for (double d : ts.deliveryDelays) {
        if (d < 1.0) {
            ++inFirstSecond;
        }
    }
    CHECK(inFirstSecond == 488);

    const auto it = ts.perNodeSecondBits.find({0, 0});
    REQUIRE(it != ts.perNodeSecondBits.end());
    CHECK(it->second.dataBits == 2'000'000.0);
    CHECK(it->second.total() == 2'000'000.0);

    // even at saturation the per-node budget is met, not exceeded
    const auto lp = analytics::checkConstraints(ts, 10.0, analytics::LpParams{}, Protocol::Aodv);
    CHECK(lp.violationCount("1.a") == 0);
}

TEST_CASE("broadcasts leave within the 10 ms jitter window") {
    auto sc = scriptScenario(Protocol::Aodv, 2, 5.0);
    Simulation sim(sc, placedTopology({{0.0, 0.0}, {100.0, 0.0}}));
    sim.injectData(SimTime{}, 0, 1);
    sim.run();

    bool sawRreq = false;
    for (const auto& r : sim.txRecords()) {
        if (r.kind == PacketKind::Rreq) {
            sawRreq = true;
            CHECK(r.start.us >= 0);
            CHECK(r.start.us <= 10'000);
        }
    }
    CHECK(sawRreq);
}

TEST_CASE("beacon monitor reports a break within ~80 ms of leaving range") {
    auto sc = scriptScenario(Protocol::AodvLl, 2, 20.0);
    auto mob = placedTopology({{0.0, 0.0}, {100.0, 0.0}});
    // crosses the 250 m boundary at exactly t = 8 s, keeps going
    mob->addLeg(1, SimTime::fromSeconds(5.0), {400.0, 0.0}, 50.0);

    std::ostringstream log;
    Simulation sim(sc, std::move(mob), &log);
    for (int i = 1; i <= 24; ++i) {
        sim.injectData(SimTime::fromSeconds(0.5 * i), 0, 1);
    }
    sim.run();

    auto breakAt = firstEventTimeS(log.str(), "beacon-break");
    REQUIRE(breakAt.has_value());
    CHECK(*breakAt > 8.0);
    CHECK(*breakAt <= 8.2);
}

TEST_CASE("a brief range excursion below the beacon threshold is forgiven") {
    auto sc = scriptScenario(Protocol::AodvLl, 2, 12.0);
    auto mob = placedTopology({{0.0, 0.0}, {240.0, 0.0}});
    // out of range only for ~53 ms, fewer than 8 consecutive 10 ms scans
    mob->addLeg(1, SimTime::fromSeconds(8.0), {258.0, 0.0}, 300.0);
    mob->addLeg(1, SimTime::fromSeconds(8.06), {200.0, 0.0}, 300.0);

    std::ostringstream log;
    Simulation sim(sc, std::move(mob), &log);
    for (int i = 1; i <= 22; ++i) {
        sim.injectData(SimTime::fromSeconds(0.5 * i), 0, 1);
    }
    sim.run();

    CHECK(log.str().find("beacon-break") == std::string::npos);
    CHECK(sim.stats().dataDelivered == 22);
}

TEST_CASE("a failed unicast surfaces as MAC feedback and a logged tx-fail") {
    auto sc = scriptScenario(Protocol::Aodv, 2, 15.0);
    auto mob = placedTopology({{0.0, 0.0}, {100.0, 0.0}});
    mob->addLeg(1, SimTime::fromSeconds(5.0), {10000.0, 0.0}, 100000.0);

    std::ostringstream log;
    Simulation sim(sc, std::move(mob), &log);
    for (int i = 1; i <= 20; ++i) {
        sim.injectData(SimTime::fromSeconds(0.5 * i), 0, 1);
    }
    sim.run();

    CHECK(log.str().find("tx-fail") != std::string::npos);
    CHECK(sim.stats().dataDropped >= 1);
    CHECK(sim.stats().linkBreaks >= 1);
}

TEST_CASE("a forwarder drops data whose ttl cannot cover the next hop") {
    auto sc = scriptScenario(Protocol::Aodv, 3, 6.0);
    Simulation sim(sc, lineTopology(3, 200.0));
    sim.injectData(SimTime::fromSeconds(1.0), 0, 2);
    // route 0->1->2 is established by the first injection; the crafted
    // packet reaches node 1 with no ttl left for the second hop
    Packet lowTtl = rawData(sim, 0, 2);
    lowTtl.ttl = 1;
    sim.scheduleAt(SimTime::fromSeconds(3.0), [&sim, lowTtl]() mutable {
        sim.sendUnicast(0, 1, std::move(lowTtl));
    });
    sim.run();

    CHECK(sim.stats().dataDelivered == 1);
    CHECK(sim.stats().dataDropped == 1);
}

TEST_CASE("identical scenario and seed replay byte-identically") {
    Scenario sc;
    sc.protocol = Protocol::AodvLl;
    sc.nodes = 12;
    sc.areaWidthM = 600.0;
    sc.areaHeightM = 600.0;
    sc.speedMps = 10.0;
    sc.pauseS = 0.0;
    sc.flows = 4;
    sc.trafficPps = 2.0;
    sc.durationS = 30.0;
    sc.seed = 9;

    std::ostringstream logA;
    Simulation a(sc, &logA);
    a.run();
    std::ostringstream logB;
    Simulation b(sc, &logB);
    b.run();

    CHECK(logA.str() == logB.str());
    CHECK(!logA.str().empty());
    CHECK(a.stats().dataDelivered == b.stats().dataDelivered);
    CHECK(a.stats().ctrlTotal() == b.stats().ctrlTotal());
    CHECK(a.stats().linkBreaks == b.stats().linkBreaks);
}

TEST_CASE("every originated packet is delivered, dropped, or still in flight") {
    for (Protocol p : {Protocol::Aodv, Protocol::AodvLl, Protocol::Dsr, Protocol::Dymo}) {
        Scenario sc;
        sc.protocol = p;
        sc.nodes = 15;
        sc.areaWidthM = 700.0;
        sc.areaHeightM = 700.0;
        sc.speedMps = 10.0;
        sc.pauseS = 0.0;
        sc.flows = 5;
        sc.trafficPps = 4.0;
        sc.durationS = 40.0;
        sc.seed = 21;
        Simulation sim(sc);
        sim.run();
        const TraceStats& ts = sim.stats();
        CHECK(ts.dataOriginated > 0);
        CHECK(ts.dataOriginated == ts.dataDelivered + ts.dataDropped + ts.dataInFlightAtEnd);
    }
}

TEST_CASE("hello transmissions and active-route node-seconds advance together") {
    auto sc = scriptScenario(Protocol::Aodv, 2, 20.0);
    Simulation sim(sc, placedTopology({{0.0, 0.0}, {100.0, 0.0}}));
    for (int i = 1; i <= 30; ++i) {
        sim.injectData(SimTime::fromSeconds(0.5 * i), 0, 1);
    }
    sim.run();
    const TraceStats& ts = sim.stats();
    CHECK(ts.ctrlHello > 0);
    CHECK(ts.activeRouteNodeSeconds == doctest::Approx(static_cast<double>(ts.ctrlHello)));
}
