#include "manetsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace manet::analytics {

namespace {

double meanOf(const std::vector<double>& xs) {
    if (xs.empty()) {
        return 0.0;
    }
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::map<std::int64_t, std::uint64_t> binCounts(const std::vector<double>& timesS) {
    std::map<std::int64_t, std::uint64_t> bins;
    for (double t : timesS) {
        bins[static_cast<std::int64_t>(std::floor(t))]++;
    }
    return bins;
}

} // namespace

double triangular(std::int64_t n) {
    if (n <= 0) {
        return 0.0;
    }
    // Integer arithmetic first, so the result is exact for any count that
    // fits a double's integer range.
    return static_cast<double>(n * (n + 1) / 2);
}

double ceRing(double dAvg, std::int64_t nK) {
    return dAvg * (1.0 + triangular(nK));
}

double ceRd(double dAvg, std::span<const std::int64_t> rings) {
    double sum = 0.0;
    for (std::int64_t nK : rings) {
        sum += ceRing(dAvg, nK);
    }
    return sum;
}

double ceRd(const CostParams& p) {
    return ceRd(p.dAvg, p.rings);
}

double ceHello(double tauRouteInUseS, double tauHelloIntervalS, double nRn) {
    if (tauHelloIntervalS <= 0.0) {
        throw std::invalid_argument("HELLO interval must be positive");
    }
    return (tauRouteInUseS / tauHelloIntervalS) * nRn;
}

double ceHello(const CostParams& p) {
    return ceHello(p.tauRouteInUseS, p.tauHelloIntervalS, p.nRn);
}

double ceRmAodvLl(const CostParams& p) {
    return static_cast<double>(p.lbIndicator) * triangular(p.nLlr) +
           static_cast<double>(p.pusIndicator) * triangular(p.nRerr);
}

double ceRmAodv(const CostParams& p) {
    // Composed as hello + link-layer part so that
    // ceRmAodvLl(p) == ceRmAodv(p) - ceHello(p) holds exactly in floating
    // point, not just algebraically.
    return ceHello(p) + ceRmAodvLl(p);
}

double ceRmDsr(std::int64_t nPs) {
    return triangular(nPs);
}

double ceRmDymo(const CostParams& p) {
    return ceHello(p) + static_cast<double>(p.lbIndicator) * triangular(p.nRerr);
}

double ceTotal(double rd, double rm) {
    return rd + rm;
}

double throughputObjective(const TraceStats& trace, double durationS) {
    if (durationS <= 0.0) {
        throw std::invalid_argument("duration must be positive");
    }
    const double pNr = trace.discoveriesStarted > 0
                           ? static_cast<double>(trace.noRouteEvents) /
                                 static_cast<double>(trace.discoveriesStarted)
                           : 0.0;
    const double bits = static_cast<double>(trace.dataDelivered) *
                        static_cast<double>(trace.payloadBitsPerPacket);
    return (1.0 - pNr) * bits / durationS;
}

std::uint64_t LpReport::violationCount(const std::string& id) const {
    for (const ConstraintViolation& c : violations) {
        if (c.id == id) {
            return c.count;
        }
    }
    return 0;
}

LpReport checkConstraints(const TraceStats& trace, double durationS, const LpParams& params,
                          Protocol /*protocol*/) {
    LpReport r;
    const double T = durationS > 0.0 ? durationS : 1.0;

    r.tAvgPlain = static_cast<double>(trace.dataDelivered) *
                  static_cast<double>(trace.payloadBitsPerPacket) / T;
    r.pNr = trace.discoveriesStarted > 0 ? static_cast<double>(trace.noRouteEvents) /
                                               static_cast<double>(trace.discoveriesStarted)
                                         : 0.0;
    r.tAvg = (1.0 - r.pNr) * r.tAvgPlain;
    r.ctRdMeanS = meanOf(trace.discoveryDurations);
    r.ctRmMeanS = meanOf(trace.repairDurations);
    r.ceRdPackets = trace.ctrlRreq + trace.ctrlRrep + trace.ctrlGratRrep;
    r.ceRmPackets = trace.ctrlRerr + trace.ctrlHello;

    r.tauCriS = params.tauCriS;
    r.betaCriBps = params.betaCriBps;
    r.betaAvailBps = params.betaAvailBps;
    r.alphaTra = static_cast<double>(trace.dataOriginated) / T;
    r.alphaRec = static_cast<double>(trace.dataDelivered) / T;
    r.alphaRd = static_cast<double>(r.ceRdPackets) / T;
    r.alphaDt = static_cast<double>(trace.dataTransmissions) / T;
    r.alphaLr = static_cast<double>(trace.repairsAttempted) / T;
    r.alphaRD = static_cast<double>(trace.discoveriesStarted) / T;
    r.alphaRM = static_cast<double>(trace.repairsAttempted + trace.salvageAttempts +
                                    trace.ctrlRerr) /
                T;
    r.psRd = trace.discoveriesStarted > 0 ? static_cast<double>(trace.discoveriesSucceeded) /
                                                static_cast<double>(trace.discoveriesStarted)
                                          : 1.0;
    r.psRm = trace.repairsAttempted > 0 ? static_cast<double>(trace.repairsSucceeded) /
                                              static_cast<double>(trace.repairsAttempted)
                                        : 1.0;
    r.recDr = trace.dataDelivered;

    // HELLO interval is 1 s in every run, so route-in-use node-seconds map
    // one-to-one onto HELLO transmissions.
    r.helloFormulaCount = ceHello(trace.activeRouteNodeSeconds, 1.0, 1.0);
    r.helloTraceCount = trace.ctrlHello;

    const auto lcBins = binCounts(trace.linkChangeTimes);
    double lcMax = params.lcMax;
    if (lcMax < 0.0) {
        lcMax = 0.0;
        for (const auto& [bin, n] : lcBins) {
            lcMax = std::max(lcMax, static_cast<double>(n));
        }
    }
    r.lcMax = lcMax;

    // 1.a: per-node per-second bandwidth budget. The MAC serializes
    // transmissions, so the margin allows only floating-point attribution
    // noise.
    {
        ConstraintViolation c{"1.a", 0, 0.0};
        for (const auto& [key, bb] : trace.perNodeSecondBits) {
            const double total = bb.total();
            if (total > params.betaAvailBps + 1e-6) {
                c.count++;
                c.worstMargin = std::max(c.worstMargin, total - params.betaAvailBps);
            }
        }
        r.violations.push_back(c);
    }

    // 1.b: link-repair responses per second vs the link-change ceiling.
    {
        ConstraintViolation c{"1.b", 0, 0.0};
        for (const auto& [bin, n] : binCounts(trace.repairAttemptTimes)) {
            if (static_cast<double>(n) > lcMax) {
                c.count++;
                c.worstMargin = std::max(c.worstMargin, static_cast<double>(n) - lcMax);
            }
        }
        r.violations.push_back(c);
    }

    // 1.c: transmissions reach exactly the unit-disk neighbor set; the engine
    // computes receivers from the same predicate, so violations cannot occur.
    r.violations.push_back(ConstraintViolation{"1.c", 0, 0.0});

    // 1.d / 1.e: success probabilities are ratios of counters, hence <= 1.
    {
        ConstraintViolation c{"1.d", 0, 0.0};
        if (r.psRd > 1.0) {
            c.count = 1;
            c.worstMargin = r.psRd - 1.0;
        }
        r.violations.push_back(c);
    }
    {
        ConstraintViolation c{"1.e", 0, 0.0};
        if (r.psRm > 1.0) {
            c.count = 1;
            c.worstMargin = r.psRm - 1.0;
        }
        r.violations.push_back(c);
    }

    // 2.a / 2.b: per-operation durations vs the critical delay.
    {
        ConstraintViolation c{"2.a", 0, 0.0};
        for (double d : trace.discoveryDurations) {
            if (d > params.tauCriS) {
                c.count++;
                c.worstMargin = std::max(c.worstMargin, d - params.tauCriS);
            }
        }
        r.violations.push_back(c);
    }
    {
        ConstraintViolation c{"2.b", 0, 0.0};
        for (double d : trace.repairDurations) {
            if (d > params.tauCriS) {
                c.count++;
                c.worstMargin = std::max(c.worstMargin, d - params.tauCriS);
            }
        }
        r.violations.push_back(c);
    }

    // 3.a / 3.b: network-wide control bits per second vs the critical budget,
    // split into discovery and maintenance traffic.
    {
        std::map<std::int64_t, double> rdBits;
        std::map<std::int64_t, double> rmBits;
        for (const auto& [key, bb] : trace.perNodeSecondBits) {
            rdBits[key.second] += bb.rdCtrlBits;
            rmBits[key.second] += bb.rmCtrlBits;
        }
        ConstraintViolation a{"3.a", 0, 0.0};
        for (const auto& [bin, bits] : rdBits) {
            if (bits > params.betaCriBps + 1e-6) {
                a.count++;
                a.worstMargin = std::max(a.worstMargin, bits - params.betaCriBps);
            }
        }
        r.violations.push_back(a);
        ConstraintViolation b{"3.b", 0, 0.0};
        for (const auto& [bin, bits] : rmBits) {
            if (bits > params.betaCriBps + 1e-6) {
                b.count++;
                b.worstMargin = std::max(b.worstMargin, bits - params.betaCriBps);
            }
        }
        r.violations.push_back(b);
    }

    return r;
}

std::vector<SweepRow> sweep(const CostParams& p, const ErsSchedule& ers) {
    std::vector<SweepRow> rows;
    const double rmAodv = ceRmAodv(p);
    const double rmLl = ceRmAodvLl(p);
    const double rmDsr = ceRmDsr(p.nPs);
    const double rmDymo = ceRmDymo(p);
    double cum = 0.0;
    double waitCum = 0.0;
    for (std::size_t i = 0; i < p.rings.size(); ++i) {
        const auto ring = ers.next(static_cast<int>(i));
        SweepRow row;
        row.m = static_cast<int>(i) + 1;
        row.ttl = ring ? ring->ttl : ers.netDiameter;
        row.waitS = ring ? ring->waitS : 2.0 * ers.ringWaitPerTtlS * ers.netDiameter;
        row.nK = p.rings[i];
        row.ceRingCost = ceRing(p.dAvg, p.rings[i]);
        cum += row.ceRingCost;
        row.ceRdCum = cum;
        waitCum += row.waitS;
        row.waitCumS = waitCum;
        row.ceRmAodv = rmAodv;
        row.ceRmAodvLl = rmLl;
        row.ceRmDsr = rmDsr;
        row.ceRmDymo = rmDymo;
        rows.push_back(row);
    }
    return rows;
}

} // namespace manet::analytics
