#include <cmath>
#include <vector>

#include "doctest.h"
#include "manetsim/mobility.hpp"

using namespace manet;

TEST_CASE("distance is euclidean") {
    CHECK(distance({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(5.0));
    CHECK(distance({1.0, 1.0}, {1.0, 1.0}) == doctest::Approx(0.0));
}

TEST_CASE("scripted node without legs never moves") {
    ScriptedMobility mob({{10.0, 20.0}});
    for (double t : {0.0, 1.0, 500.0}) {
        auto p = mob.positionAt(0, SimTime::fromSeconds(t));
        CHECK(p.x == doctest::Approx(10.0));
        CHECK(p.y == doctest::Approx(20.0));
    }
}

TEST_CASE("scripted leg interpolates linearly and then holds") {
    ScriptedMobility mob({{0.0, 0.0}});
    mob.addLeg(0, SimTime::fromSeconds(10.0), {100.0, 0.0}, 10.0);

    CHECK(mob.positionAt(0, SimTime::fromSeconds(5.0)).x == doctest::Approx(0.0));
    CHECK(mob.positionAt(0, SimTime::fromSeconds(10.0)).x == doctest::Approx(0.0));
    CHECK(mob.positionAt(0, SimTime::fromSeconds(15.0)).x == doctest::Approx(50.0));
    CHECK(mob.positionAt(0, SimTime::fromSeconds(20.0)).x == doctest::Approx(100.0));
    CHECK(mob.positionAt(0, SimTime::fromSeconds(60.0)).x == doctest::Approx(100.0));
}

TEST_CASE("later legs start from where the previous one ended") {
    ScriptedMobility mob({{0.0, 0.0}, {5.0, 5.0}});
    mob.addLeg(0, SimTime::fromSeconds(0.0), {100.0, 0.0}, 10.0);  // done at t=10
    mob.addLeg(0, SimTime::fromSeconds(30.0), {100.0, 50.0}, 5.0); // done at t=40

    auto mid = mob.positionAt(0, SimTime::fromSeconds(35.0));
    CHECK(mid.x == doctest::Approx(100.0));
    CHECK(mid.y == doctest::Approx(25.0));
    auto done = mob.positionAt(0, SimTime::fromSeconds(45.0));
    CHECK(done.y == doctest::Approx(50.0));

    // the other node is untouched by node 0's script
    auto other = mob.positionAt(1, SimTime::fromSeconds(45.0));
    CHECK(other.x == doctest::Approx(5.0));
}

TEST_CASE("random waypoint keeps every node inside the area") {
    RandomWaypointMobility mob(20, 800.0, 600.0, 30.0, 0.0, 42);
    for (int step = 0; step <= 200; ++step) {
        const SimTime t = SimTime::fromSeconds(step * 3.0);
        for (NodeId n = 0; n < 20; ++n) {
            auto p = mob.positionAt(n, t);
            CHECK(p.x >= 0.0);
            CHECK(p.x <= 800.0);
            CHECK(p.y >= 0.0);
            CHECK(p.y <= 600.0);
        }
    }
}

TEST_CASE("random waypoint with zero speed pins nodes to their start point") {
    RandomWaypointMobility mob(5, 1000.0, 1000.0, 0.0, 0.0, 7);
    std::vector<Position> start;
    for (NodeId n = 0; n < 5; ++n) {
        start.push_back(mob.positionAt(n, SimTime{}));
    }
    for (NodeId n = 0; n < 5; ++n) {
        auto p = mob.positionAt(n, SimTime::fromSeconds(900.0));
        CHECK(p.x == doctest::Approx(start[n].x));
        CHECK(p.y == doctest::Approx(start[n].y));
    }
}

TEST_CASE("random waypoint honors the initial pause") {
    RandomWaypointMobility mob(5, 1000.0, 1000.0, 20.0, 50.0, 9);
    std::vector<Position> start;
    for (NodeId n = 0; n < 5; ++n) {
        start.push_back(mob.positionAt(n, SimTime{}));
    }
    // still parked just before the pause expires
    for (NodeId n = 0; n < 5; ++n) {
        auto p = mob.positionAt(n, SimTime::fromSeconds(49.9));
        CHECK(p.x == doctest::Approx(start[n].x));
        CHECK(p.y == doctest::Approx(start[n].y));
    }
    // movement happens eventually
    bool moved = false;
    for (NodeId n = 0; n < 5; ++n) {
        auto p = mob.positionAt(n, SimTime::fromSeconds(120.0));
        if (distance(p, start[n]) > 1.0) {
            moved = true;
        }
    }
    CHECK(moved);
}

TEST_CASE("random waypoint is reproducible per seed and distinct across seeds") {
    RandomWaypointMobility a(10, 1000.0, 1000.0, 15.0, 2.0, 123);
    RandomWaypointMobility b(10, 1000.0, 1000.0, 15.0, 2.0, 123);
    RandomWaypointMobility c(10, 1000.0, 1000.0, 15.0, 2.0, 124);

    bool anyDiffer = false;
    for (int step = 0; step <= 50; ++step) {
        const SimTime t = SimTime::fromSeconds(step * 6.0);
        for (NodeId n = 0; n < 10; ++n) {
            auto pa = a.positionAt(n, t);
            auto pb = b.positionAt(n, t);
            auto pc = c.positionAt(n, t);
            CHECK(pa.x == pb.x);
            CHECK(pa.y == pb.y);
            if (pa.x != pc.x || pa.y != pc.y) {
                anyDiffer = true;
            }
        }
    }
    CHECK(anyDiffer);
}
