#ifndef MANETSIM_ANALYTICS_HPP
#define MANETSIM_ANALYTICS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "manetsim/routing_common.hpp"
#include "manetsim/trace_stats.hpp"

namespace manet::analytics {

/// Sum 1 + 2 + ... + n.
double triangular(std::int64_t n);

/// Symbol set of the energy-cost formulas: ring populations, repair/RERR
/// flood sizes, salvage index, active-route node count and HELLO timing,
/// plus the binary indicators gating the maintenance terms.
struct CostParams {
    double dAvg = 0.0;
    std::vector<std::int64_t> rings; // N_k per ring, k = 1..M
    std::int64_t nLlr = 0;           // nodes in a local-repair flood
    std::int64_t nRerr = 0;          // nodes receiving RERR
    std::int64_t nPs = 0;            // salvaging node index
    double nRn = 0.0;                // nodes on active routes
    double tauRouteInUseS = 0.0;
    double tauHelloIntervalS = 1.0;
    int lbIndicator = 0;  // |sgn lb_RN|
    int pusIndicator = 0; // |sgn P_us^llr|
};

/// Cost of one discovery ring: d_avg * (1 + sum_{i=1..N_k} i).
double ceRing(double dAvg, std::int64_t nK);

/// Discovery cost: sum of ring costs over the attempted rings.
double ceRd(double dAvg, std::span<const std::int64_t> rings);
double ceRd(const CostParams& p);

/// HELLO cost: (route-in-use time / HELLO interval) * active-route nodes.
/// Throws std::invalid_argument on a nonpositive interval.
double ceHello(double tauRouteInUseS, double tauHelloIntervalS, double nRn);
double ceHello(const CostParams& p);

/// Maintenance costs per protocol. The indicator-gated flood terms are read
/// as products, which keeps the RERR term conditional on repair failure.
double ceRmAodv(const CostParams& p);
double ceRmAodvLl(const CostParams& p);
double ceRmDsr(std::int64_t nPs);
double ceRmDymo(const CostParams& p);

/// Total cost: discovery + maintenance.
double ceTotal(double rd, double rm);

/// Literal throughput objective: sum over requests of
/// (1 - p_nr) * Rec_dr * bits / T. The plain delivered-bits/T reading is
/// reported alongside (see LpReport) because the literal form discounts
/// already-received packets.
double throughputObjective(const TraceStats& trace, double durationS);

/// Thresholds for the constraint checks. Unset lcMax means "measured from
/// the trace" (max link changes in any 1 s bin).
struct LpParams {
    double tauCriS = 30.0;
    double betaAvailBps = 2'000'000.0;
    double betaCriBps = 1'000'000.0; // default beta_avail / 2
    double lcMax = -1.0;             // < 0: measure from trace
};

struct ConstraintViolation {
    std::string id; // "1.a", "1.b", "1.c", "1.d", "1.e", "2.a", "2.b", "3.a", "3.b"
    std::uint64_t count = 0;
    double worstMargin = 0.0; // amount by which the worst case exceeded the bound
};

/// Evaluation of the three objectives and all constraints over one run.
struct LpReport {
    double tAvg = 0.0;      // literal objective value
    double tAvgPlain = 0.0; // delivered bits / T
    double pNr = 0.0;
    double ctRdMeanS = 0.0; // mean discovery duration
    double ctRmMeanS = 0.0; // mean repair duration
    std::uint64_t ceRdPackets = 0; // RREQ + RREP + grat RREP transmissions
    std::uint64_t ceRmPackets = 0; // RERR + HELLO transmissions
    std::vector<ConstraintViolation> violations;

    // Rate / probability parameters echoed from the trace
    double tauCriS = 0.0;
    double betaCriBps = 0.0;
    double betaAvailBps = 0.0;
    double lcMax = 0.0;
    double alphaTra = 0.0; // data request arrivals / s
    double alphaRec = 0.0; // received data packets / s
    double alphaRd = 0.0;  // RD control transmissions / s
    double alphaDt = 0.0;  // DATA transmissions / s
    double alphaLr = 0.0;  // link-repair responses / s
    double alphaRD = 0.0;  // route (re)discoveries / s
    double alphaRM = 0.0;  // maintenance operations / s
    double psRd = 1.0;
    double psRm = 1.0;
    std::uint64_t recDr = 0;

    // Formula-vs-trace cross-check (validation mode)
    double helloFormulaCount = 0.0; // ce_hello evaluated on trace-measured params
    std::uint64_t helloTraceCount = 0;

    std::uint64_t violationCount(const std::string& id) const;
};

/// Evaluates constraints 1.a-1.e, 2.a-2.b and 3.a-3.b over the trace in 1 s
/// bins and collects the report. Never aborts; violations are listed.
LpReport checkConstraints(const TraceStats& trace, double durationS, const LpParams& params,
                          Protocol protocol);

/// One row of the standalone analytic sweep: discovery cost
/// and cumulative ERS waiting time against the ring count.
struct SweepRow {
    int m = 0;
    int ttl = 0;
    std::int64_t nK = 0;
    double ceRingCost = 0.0;
    double ceRdCum = 0.0;
    double waitS = 0.0;
    double waitCumS = 0.0;
    double ceRmAodv = 0.0;
    double ceRmAodvLl = 0.0;
    double ceRmDsr = 0.0;
    double ceRmDymo = 0.0;
};

std::vector<SweepRow> sweep(const CostParams& p, const ErsSchedule& ers);

} // namespace manet::analytics

#endif
