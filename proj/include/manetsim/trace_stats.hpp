#ifndef MANETSIM_TRACE_STATS_HPP
#define MANETSIM_TRACE_STATS_HPP

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "manetsim/packet.hpp"
#include "manetsim/sim_time.hpp"

namespace manet {

/// Per-node bandwidth use inside one 1 s bin, split so the LP constraint
/// checks can compare data vs discovery vs maintenance traffic separately.
struct BinBits {
    double dataBits = 0.0;
    double rdCtrlBits = 0.0; // RREQ + RREP (incl. gratuitous)
    double rmCtrlBits = 0.0; // RERR + HELLO

    double total() const { return dataBits + rdCtrlBits + rmCtrlBits; }
    double ctrl() const { return rdCtrlBits + rmCtrlBits; }
};

/// Aggregated counters for one run. This is the single input consumed by the
/// metrics module and the LP constraint checks.
struct TraceStats {
    // Data plane
    std::uint64_t dataOriginated = 0;
    std::uint64_t dataDelivered = 0;
    std::uint64_t dataDropped = 0;
    std::uint64_t dataInFlightAtEnd = 0; // filled after the horizon by a structural walk
    std::uint64_t dataTransmissions = 0; // hop-wise DATA sends
    std::int64_t payloadBitsPerPacket = 0;
    std::vector<double> deliveryDelays; // seconds, one per delivered packet

    // Control plane, counted per hop-wise transmission
    std::uint64_t ctrlRreq = 0;
    std::uint64_t ctrlRrep = 0;
    std::uint64_t ctrlGratRrep = 0;
    std::uint64_t ctrlRerr = 0;
    std::uint64_t ctrlHello = 0;

    // Mobility / link dynamics
    std::uint64_t linkBreaks = 0; // physical, from the link-change scan
    std::uint64_t linkForms = 0;
    std::vector<double> linkChangeTimes; // seconds

    // Protocol maintenance events
    std::uint64_t discoveriesStarted = 0;
    std::uint64_t discoveriesSucceeded = 0;
    std::uint64_t noRouteEvents = 0; // ERS exhausted (p_nr numerator)
    std::uint64_t repairsAttempted = 0;
    std::uint64_t repairsSucceeded = 0;
    std::uint64_t repairsFailed = 0;
    std::uint64_t salvageAttempts = 0;
    std::uint64_t salvages = 0; // successful (n_ps events)
    std::uint64_t rerrReceptions = 0;
    std::uint64_t cacheEvictions = 0; // DSR route-cache capacity evictions
    std::vector<double> repairAttemptTimes; // seconds, for constraint 1.b

    std::vector<double> discoveryDurations; // seconds (CT_RD observations)
    std::vector<double> repairDurations;    // seconds (CT_RM observations)

    // Liveness sampling: node-seconds spent on at least one active route
    double activeRouteNodeSeconds = 0.0;
    double avgNodeDegree = 0.0;

    // (node, 1 s bin) -> bits, with per-transmission overlap attribution
    std::map<std::pair<NodeId, std::int64_t>, BinBits> perNodeSecondBits;

    std::uint64_t ctrlTotal() const { return ctrlRreq + ctrlRrep + ctrlGratRrep + ctrlRerr + ctrlHello; }
};

/// Optional tab-separated event log, one line per simulation event.
/// Columns: time_us, node, event_kind, packet_uid, packet_kind, detail.
class EventLog {
  public:
    explicit EventLog(std::ostream* out = nullptr) : m_out(out) {}

    bool enabled() const { return m_out != nullptr; }

    void write(SimTime at, NodeId node, const char* kind, const Packet* pkt, const std::string& detail);

  private:
    std::ostream* m_out;
};

} // namespace manet

#endif
