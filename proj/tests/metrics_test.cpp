#include "doctest.h"
#include "manetsim/metrics.hpp"

using namespace manet;

namespace {

TraceStats baseTrace() {
    TraceStats ts;
    ts.payloadBitsPerPacket = 512 * 8;
    return ts;
}

} // namespace

TEST_CASE("throughput is delivered payload bits per second") {
    TraceStats ts = baseTrace();
    ts.dataDelivered = 100;
    CHECK(metrics::throughput(ts, 50.0) == doctest::Approx(100.0 * 4096.0 / 50.0));
    ts.dataDelivered = 0;
    CHECK(metrics::throughput(ts, 50.0) == doctest::Approx(0.0));
}

TEST_CASE("average end-to-end delay is the mean of per-packet delays") {
    TraceStats ts = baseTrace();
    ts.deliveryDelays = {1.0, 2.0, 3.0};
    ts.dataDelivered = 3;
    auto d = metrics::avgE2ed(ts);
    REQUIRE(d.has_value());
    CHECK(*d == doctest::Approx(2.0));
}

TEST_CASE("average delay is absent when nothing was delivered") {
    TraceStats ts = baseTrace();
    CHECK(!metrics::avgE2ed(ts).has_value());
}

TEST_CASE("nrl counts every control transmission per delivered packet") {
    TraceStats ts = baseTrace();
    ts.ctrlRreq = 40;
    ts.ctrlRrep = 30;
    ts.ctrlGratRrep = 10;
    ts.ctrlRerr = 15;
    ts.ctrlHello = 5;
    ts.dataDelivered = 50;
    auto r = metrics::nrl(ts);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(100.0 / 50.0));
}

TEST_CASE("nrl is absent when nothing was delivered") {
    TraceStats ts = baseTrace();
    ts.ctrlRreq = 40;
    CHECK(!metrics::nrl(ts).has_value());
}

TEST_CASE("nrl is a packet-count ratio, insensitive to payload size") {
    TraceStats small = baseTrace();
    small.payloadBitsPerPacket = 64 * 8;
    small.ctrlRreq = 12;
    small.dataDelivered = 4;

    TraceStats large = small;
    large.payloadBitsPerPacket = 4096 * 8;

    CHECK(*metrics::nrl(small) == *metrics::nrl(large));
}
