#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "manetsim/analytics.hpp"
#include "manetsim/rng.hpp"

using namespace manet;
using namespace manet::analytics;

namespace {

CostParams exampleParams() {
    CostParams p;
    p.dAvg = 4.0;
    p.rings = {3, 5};
    p.nLlr = 4;
    p.nRerr = 3;
    p.nPs = 4;
    p.nRn = 5.0;
    p.tauRouteInUseS = 10.0;
    p.tauHelloIntervalS = 1.0;
    p.lbIndicator = 1;
    p.pusIndicator = 1;
    return p;
}

} // namespace

TEST_CASE("ring and discovery costs match hand-computed values") {
    CHECK(triangular(0) == 0.0);
    CHECK(triangular(3) == 6.0);
    CHECK(triangular(100) == 5050.0);

    CHECK(ceRing(4.0, 3) == doctest::Approx(28.0));
    CHECK(ceRing(6.0, 10) == doctest::Approx(336.0));

    const std::int64_t rings[] = {3, 5};
    CHECK(ceRd(4.0, rings) == doctest::Approx(92.0));
}

TEST_CASE("hello cost is transmissions per interval times active-route nodes") {
    CHECK(ceHello(900.0, 1.0, 50.0) == doctest::Approx(45000.0));
    CHECK(ceHello(10.0, 0.5, 4.0) == doctest::Approx(80.0));
    CHECK_THROWS_AS(ceHello(10.0, 0.0, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(ceHello(10.0, -1.0, 4.0), std::invalid_argument);
}

TEST_CASE("maintenance costs match hand-computed values per protocol") {
    const CostParams p = exampleParams();
    CHECK(ceHello(p) == doctest::Approx(50.0));
    CHECK(ceRmAodv(p) == doctest::Approx(66.0));
    CHECK(ceRmAodvLl(p) == doctest::Approx(16.0));
    CHECK(ceRmDsr(4) == doctest::Approx(10.0));
    CHECK(ceRmDsr(100) == doctest::Approx(5050.0));
    CHECK(ceRmDymo(p) == doctest::Approx(56.0));

    // indicator gating zeroes the flood terms
    CostParams quiet = p;
    quiet.lbIndicator = 0;
    quiet.pusIndicator = 0;
    CHECK(ceRmAodvLl(quiet) == 0.0);
    CHECK(ceRmAodv(quiet) == doctest::Approx(50.0));
    CHECK(ceRmDymo(quiet) == doctest::Approx(50.0));
}

TEST_CASE("triangular and ring costs agree with a brute-force sum up to 10^4") {
    const auto started = std::chrono::steady_clock::now();
    double sum = 0.0;
    for (std::int64_t n = 0; n <= 10'000; ++n) {
        if (n > 0) {
            sum += static_cast<double>(n);
        }
        REQUIRE(triangular(n) == sum);
        REQUIRE(ceRing(1.0, n) == 1.0 + sum);
        REQUIRE(ceRmDsr(n) == sum);
    }
    const auto elapsed = std::chrono::steady_clock::now() - started;
    CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() < 1000);
}

TEST_CASE("aodv maintenance cost decomposes exactly into hello plus link-layer part") {
    // Exact floating-point identity, checked over randomized parameters with
    // dyadic hello intervals so the hello term itself is exact.
    Rng rng(20240901);
    const double intervals[] = {0.25, 0.5, 1.0, 2.0};
    for (int i = 0; i < 1000; ++i) {
        CostParams p;
        p.dAvg = static_cast<double>(rng.uniformInt(1, 20));
        p.rings = {rng.uniformInt(0, 50), rng.uniformInt(0, 50)};
        p.nLlr = rng.uniformInt(0, 200);
        p.nRerr = rng.uniformInt(0, 200);
        p.nPs = rng.uniformInt(0, 200);
        p.nRn = static_cast<double>(rng.uniformInt(0, 100));
        p.tauRouteInUseS = static_cast<double>(rng.uniformInt(0, 900));
        p.tauHelloIntervalS = intervals[rng.uniformInt(0, 3)];
        p.lbIndicator = static_cast<int>(rng.uniformInt(0, 1));
        p.pusIndicator = static_cast<int>(rng.uniformInt(0, 1));

        REQUIRE(ceRmAodv(p) == ceHello(p) + ceRmAodvLl(p));
        REQUIRE(ceRmAodvLl(p) <= ceRmAodv(p));
        REQUIRE(ceTotal(ceRd(p), ceRmAodv(p)) == ceRd(p) + ceRmAodv(p));
    }
}

TEST_CASE("sweep accumulates cost and wait monotonically over the default schedule") {
    CostParams p = exampleParams();
    p.rings = {2, 6, 14, 28, 40, 40, 40}; // one population per attempt
    const ErsSchedule ers;
    const auto rows = sweep(p, ers);
    REQUIRE(rows.size() == 7);

    CHECK(rows[0].ttl == 1);
    CHECK(rows[3].ttl == 7);
    CHECK(rows[4].ttl == 35);
    CHECK(rows[6].ttl == 35);
    CHECK(rows[0].waitS == doctest::Approx(0.1));
    CHECK(rows[4].waitS == doctest::Approx(3.5));

    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].ceRdCum > rows[i - 1].ceRdCum);
        CHECK(rows[i].waitCumS > rows[i - 1].waitCumS);
        // maintenance columns do not depend on the ring index
        CHECK(rows[i].ceRmAodv == rows[0].ceRmAodv);
        CHECK(rows[i].ceRmDsr == rows[0].ceRmDsr);
    }
    CHECK(rows[0].ceRdCum == doctest::Approx(ceRing(p.dAvg, 2)));
    CHECK(rows[1].ceRdCum == doctest::Approx(ceRing(p.dAvg, 2) + ceRing(p.dAvg, 6)));
}

TEST_CASE("constraint checks flag synthetic budget violations") {
    TraceStats ts;
    ts.payloadBitsPerPacket = 4096;
    ts.dataOriginated = 10;
    ts.dataDelivered = 8;
    ts.discoveriesStarted = 4;
    ts.discoveriesSucceeded = 3;
    ts.noRouteEvents = 1;
    ts.discoveryDurations = {0.5, 31.0, 2.0}; // one past the 30 s critical delay
    ts.repairDurations = {1.0};
    ts.perNodeSecondBits[{0, 0}] = BinBits{2'500'000.0, 0.0, 0.0};  // over 1.a
    ts.perNodeSecondBits[{1, 0}] = BinBits{1'000'000.0, 0.0, 0.0};  // fine
    ts.perNodeSecondBits[{2, 3}] = BinBits{0.0, 1'200'000.0, 0.0};  // over 3.a
    ts.perNodeSecondBits[{3, 4}] = BinBits{0.0, 0.0, 1'100'000.0};  // over 3.b

    const LpReport r = checkConstraints(ts, 100.0, LpParams{}, Protocol::Aodv);

    CHECK(r.violationCount("1.a") == 1);
    CHECK(r.violationCount("1.c") == 0);
    CHECK(r.violationCount("1.d") == 0);
    CHECK(r.violationCount("1.e") == 0);
    CHECK(r.violationCount("2.a") == 1);
    CHECK(r.violationCount("2.b") == 0);
    CHECK(r.violationCount("3.a") == 1);
    CHECK(r.violationCount("3.b") == 1);

    CHECK(r.pNr == doctest::Approx(0.25));
    CHECK(r.tAvgPlain == doctest::Approx(8.0 * 4096.0 / 100.0));
    CHECK(r.tAvg == doctest::Approx(0.75 * 8.0 * 4096.0 / 100.0));
    CHECK(r.psRd == doctest::Approx(0.75));
    CHECK(r.recDr == 8);
}

TEST_CASE("throughput objective discounts by the no-route probability") {
    TraceStats ts;
    ts.payloadBitsPerPacket = 1000;
    ts.dataDelivered = 10;
    ts.discoveriesStarted = 2;
    ts.noRouteEvents = 1;
    CHECK(throughputObjective(ts, 10.0) == doctest::Approx(0.5 * 10.0 * 1000.0 / 10.0));
    CHECK_THROWS_AS(throughputObjective(ts, 0.0), std::invalid_argument);
}
