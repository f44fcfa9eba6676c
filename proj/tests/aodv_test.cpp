#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "manetsim/engine.hpp"
#include "test_support.hpp"

using namespace manet;
using test_support::lineTopology;
using test_support::placedTopology;
using test_support::scriptScenario;
using test_support::txCount;
using test_support::txCountAll;

TEST_CASE("one-hop discovery delivers and resolves in one attempt") {
    auto sc = scriptScenario(Protocol::Aodv, 2, 10.0);
    Simulation sim(sc, placedTopology({{0.0, 0.0}, {100.0, 0.0}}));
    sim.injectData(SimTime::fromSeconds(1.0), 0, 1);
    sim.run();

    const TraceStats& ts = sim.stats();
    CHECK(ts.dataDelivered == 1);
    CHECK(ts.discoveriesStarted == 1);
    CHECK(ts.discoveriesSucceeded == 1);
    CHECK(txCount(sim, 0, PacketKind::Rreq) == 1);
    CHECK(ts.ctrlRrep == 1);
    REQUIRE(ts.deliveryDelays.size() == 1);
    CHECK(ts.deliveryDelays[0] < 0.05); // jittered RREQ + RREP + data airtime
    REQUIRE(ts.discoveryDurations.size() == 1);
    CHECK(ts.discoveryDurations[0] < 0.05);
}

TEST_CASE("discovery against a partitioned destination exhausts the full schedule") {
    auto sc = scriptScenario(Protocol::Aodv, 2, 30.0);
    Simulation sim(sc, placedTopology({{0.0, 0.0}, {1000.0, 0.0}}));
    sim.injectData(SimTime{}, 0, 1);
    sim.run();

    const TraceStats& ts = sim.stats();
    CHECK(ts.dataDelivered == 0);
    CHECK(ts.dataDropped == 1);
    CHECK(ts.noRouteEvents == 1);
    CHECK(ts.discoveriesSucceeded == 0);
    // rings 1,3,5,7 then three net-wide floods, one transmission each
    CHECK(txCount(sim, 0, PacketKind::Rreq) == 7);
}

TEST_CASE("the expanding ring reaches exactly as many hops as its ttl") {
    // On a 10-node line the first successful attempt is the first ring whose
    // ttl covers the hop distance, so the source transmits one RREQ per ring
    // up to and including that one.
    const std::map<int, std::size_t> expectedRreqs = {
        {1, 1}, {2, 2}, {3, 2}, {4, 3}, {5, 3}, {6, 4}, {7, 4}, {8, 5},
    };
    for (const auto& [hops, rreqs] : expectedRreqs) {
        auto sc = scriptScenario(Protocol::Aodv, 10, 30.0);
        Simulation sim(sc, lineTopology(10, 200.0));
        sim.injectData(SimTime{}, 0, static_cast<NodeId>(hops));
        sim.run();

        INFO("hop distance ", hops);
        CHECK(sim.stats().dataDelivered == 1);
        CHECK(txCount(sim, 0, PacketKind::Rreq) == rreqs);
    }
}

TEST_CASE("forwarders suppress duplicate route requests") {
    auto sc = scriptScenario(Protocol::Aodv, 3, 10.0);
    Simulation sim(sc, lineTopology(3, 200.0));
    sim.injectData(SimTime{}, 0, 2);
    sim.run();

    // attempt 1 (ttl 1) dies at node 1; attempt 2 (ttl 3) is forwarded once
    CHECK(txCount(sim, 0, PacketKind::Rreq) == 2);
    CHECK(txCount(sim, 1, PacketKind::Rreq) == 1);
    CHECK(txCount(sim, 2, PacketKind::Rreq) == 0);
    CHECK(sim.stats().dataDelivered == 1);
}

TEST_CASE("an intermediate with a fresh route answers on the destination's behalf") {
    // 0-1-2 line, with 3 attached to 1 only. After 0->2 traffic, node 1 holds
    // a fresh route to 2 and can answer 3's request without a new flood.
    auto sc = scriptScenario(Protocol::Aodv, 4, 10.0);
    auto mob = placedTopology({{0.0, 0.0}, {200.0, 0.0}, {400.0, 0.0}, {200.0, 200.0}});
    Simulation sim(sc, std::move(mob));
    sim.injectData(SimTime::fromSeconds(0.5), 0, 2);
    sim.injectData(SimTime::fromSeconds(3.0), 3, 2);
    sim.run();

    const TraceStats& ts = sim.stats();
    CHECK(ts.dataDelivered == 2);
    CHECK(ts.ctrlGratRrep == 1);
    CHECK(ts.ctrlRrep == 2); // first flood only: reply hop 2->1 plus relay 1->0
    // flood 1: two rings from 0 plus forwards by 1 and 3; flood 2: one ring
    CHECK(ts.ctrlRreq == 5);
    // node 2 never saw 3's request
    CHECK(txCount(sim, 3, PacketKind::Rreq) == 2); // phase-1 forward + own ring
}

TEST_CASE("hello beacons run only on nodes with active routes") {
    auto quiet = scriptScenario(Protocol::Aodv, 2, 30.0);
    Simulation idle(quiet, placedTopology({{0.0, 0.0}, {100.0, 0.0}}));
    idle.run();
    CHECK(idle.stats().ctrlHello == 0);

    auto busy = scriptScenario(Protocol::Aodv, 2, 30.0);
    Simulation active(busy, placedTopology({{0.0, 0.0}, {100.0, 0.0}}));
    for (int i = 1; i <= 50; ++i) {
        active.injectData(SimTime::fromSeconds(0.5 * i), 0, 1);
    }
    active.run();
    CHECK(active.stats().ctrlHello > 0);
    CHECK(active.stats().dataDelivered == 50);
}

TEST_CASE("hello silence tears down the route and triggers rediscovery") {
    auto sc = scriptScenario(Protocol::Aodv, 3, 30.0);
    auto mob = lineTopology(3, 200.0);
    mob->addLeg(1, SimTime::fromSeconds(10.0), {15000.0, 0.0}, 100000.0);
    Simulation sim(sc, std::move(mob));
    for (int i = 1; i <= 50; ++i) {
        sim.injectData(SimTime::fromSeconds(0.5 * i), 0, 2);
    }
    sim.run();

    const TraceStats& ts = sim.stats();
    CHECK(ts.dataDelivered >= 15); // everything before the break
    CHECK(ts.dataDelivered < 50);
    CHECK(ts.dataDropped > 0);
    CHECK(ts.discoveriesStarted >= 2); // initial + at least one rediscovery
    CHECK(ts.noRouteEvents >= 1);      // 2 is unreachable once 1 left
    CHECK(ts.linkBreaks >= 1);
}

TEST_CASE("a mid-route node repairs locally around a dead next hop") {
    // 0-1-2-3-4 line; node 5 wanders in near (600,140) before node 3 dies,
    // giving 2 an alternate 2-hop path to 4.
    auto sc = scriptScenario(Protocol::Aodv, 6, 40.0);
    auto mob = placedTopology({{0.0, 0.0},
                               {200.0, 0.0},
                               {400.0, 0.0},
                               {600.0, 0.0},
                               {800.0, 0.0},
                               {600.0, 1000.0}});
    mob->addLeg(5, SimTime::fromSeconds(4.0), {600.0, 140.0}, 215.0);
    mob->addLeg(3, SimTime::fromSeconds(10.0), {600.0, 15000.0}, 100000.0);
    Simulation sim(sc, std::move(mob));
    for (int i = 1; i <= 60; ++i) {
        sim.injectData(SimTime::fromSeconds(0.5 * i), 0, 4);
    }
    sim.run();

    const TraceStats& ts = sim.stats();
    CHECK(ts.repairsAttempted >= 1);
    CHECK(ts.repairsSucceeded >= 1);
    CHECK(!ts.repairDurations.empty());
    CHECK(ts.dataDelivered >= 40); // traffic resumes after the repair
    // packets buffered through the repair pick up visible extra delay; the
    // break is noticed within ~80 ms and ring 1 closes it ~0.1 s later
    const double worst = *std::max_element(ts.deliveryDelays.begin(), ts.deliveryDelays.end());
    const double best = *std::min_element(ts.deliveryDelays.begin(), ts.deliveryDelays.end());
    CHECK(worst > 0.15);
    CHECK(best < 0.1);

    // the post-repair routing state stays loop-free: walking next hops
    // toward 4 terminates
    for (NodeId start : {0u, 1u, 2u, 5u}) {
        NodeId cur = start;
        std::set<NodeId> seen;
        int steps = 0;
        while (cur != 4 && steps < 6) {
            bool advanced = false;
            for (const auto& row : sim.routeSnapshot(cur)) {
                if (row.dest == 4 && row.valid) {
                    REQUIRE(seen.insert(cur).second);
                    cur = row.nextHop;
                    advanced = true;
                    break;
                }
            }
            if (!advanced) {
                break;
            }
            ++steps;
        }
    }
}

TEST_CASE("a failed repair floods route errors back to the source") {
    auto sc = scriptScenario(Protocol::Aodv, 5, 40.0);
    auto mob = lineTopology(5, 200.0);
    mob->addLeg(3, SimTime::fromSeconds(10.0), {600.0, 15000.0}, 100000.0);
    Simulation sim(sc, std::move(mob));
    for (int i = 1; i <= 60; ++i) {
        sim.injectData(SimTime::fromSeconds(0.5 * i), 0, 4);
    }
    sim.run();

    const TraceStats& ts = sim.stats();
    CHECK(ts.repairsAttempted >= 1);
    CHECK(ts.repairsSucceeded == 0);
    CHECK(ts.repairsFailed >= 1);
    CHECK(ts.ctrlRerr >= 2);       // node 2 tells 1, node 1 tells 0
    CHECK(ts.rerrReceptions >= 2);
    CHECK(ts.noRouteEvents >= 1);  // the source's rediscovery exhausts
    CHECK(ts.dataDelivered < 60);
}

TEST_CASE("link-layer feedback detects breaks faster than hello silence") {
    const auto build = [](Protocol p) {
        auto sc = scriptScenario(p, 6, 40.0);
        sc.seed = 5;
        auto mob = placedTopology({{0.0, 0.0},
                                   {200.0, 0.0},
                                   {400.0, 0.0},
                                   {600.0, 0.0},
                                   {800.0, 0.0},
                                   {600.0, 1000.0}});
        mob->addLeg(5, SimTime::fromSeconds(4.0), {600.0, 140.0}, 215.0);
        mob->addLeg(3, SimTime::fromSeconds(10.0), {600.0, 15000.0}, 100000.0);
        auto sim = std::make_unique<Simulation>(sc, std::move(mob));
        for (int i = 1; i <= 60; ++i) {
            sim->injectData(SimTime::fromSeconds(0.5 * i), 0, 4);
        }
        sim->run();
        return sim;
    };

    auto plain = build(Protocol::Aodv);
    auto ll = build(Protocol::AodvLl);

    CHECK(ll->stats().ctrlHello == 0); // beacons replace hellos entirely
    CHECK(plain->stats().ctrlHello > 0);
    CHECK(ll->stats().repairsSucceeded >= 1);
    // faster detection loses fewer packets around the break
    CHECK(ll->stats().dataDelivered > plain->stats().dataDelivered);
}
