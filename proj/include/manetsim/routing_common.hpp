#ifndef MANETSIM_ROUTING_COMMON_HPP
#define MANETSIM_ROUTING_COMMON_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "manetsim/packet.hpp"
#include "manetsim/rng.hpp"
#include "manetsim/sim_time.hpp"
#include "manetsim/trace_stats.hpp"

namespace manet {

enum class Protocol : std::uint8_t { Aodv, AodvLl, Dsr, DsrM, Dymo };

const char* protocolName(Protocol p);
std::optional<Protocol> protocolFromName(const std::string& name);

/// Expanding ring search schedule. Attempt i floods with
/// ttl = ttl_start + i * ttl_increment while that stays within ttl_threshold,
/// then net_diameter for up to maxNetAttempts network-wide retries.
struct ErsSchedule {
    int ttlStart = 1;
    int ttlIncrement = 2;
    int ttlThreshold = 7;
    int netDiameter = 35;
    int maxNetAttempts = 3;
    double ringWaitPerTtlS = 0.05;

    struct Ring {
        int ttl = 0;
        double waitS = 0.0; // timeout before the next attempt: 2 * wait_per_ttl * ttl
    };

    /// Ring for this 0-based attempt, or nullopt once exhausted.
    std::optional<Ring> next(int attempt) const;

    int ringedAttempts() const { return (ttlThreshold - ttlStart) / ttlIncrement + 1; }
    int totalAttempts() const { return ringedAttempts() + maxNetAttempts; }
};

enum class DropReason : std::uint8_t {
    BufferTimeout,
    BufferOverflow,
    NoRoute,
    RouteDiscoveryFailed,
    LinkLost,
    SalvageFailed,
    RepairFailed,
    TtlExpired,
};

const char* dropReasonName(DropReason r);

/// FIFO store for DATA awaiting a route. Entries are evicted exactly at the
/// timeout or when capacity overflows (oldest first).
class SendBuffer {
  public:
    SendBuffer(std::size_t capacity, SimTime timeout) : m_capacity(capacity), m_timeout(timeout) {}

    struct Entry {
        Packet pkt;
        SimTime enqueuedAt{};
    };

    /// Returns the evicted oldest packet when the buffer was full.
    std::optional<Packet> push(Packet pkt, SimTime now);

    /// Entries whose age reached the timeout, removed from the buffer.
    std::vector<Packet> takeExpired(SimTime now);

    /// All buffered packets for dst, FIFO order, removed from the buffer.
    std::vector<Packet> takeForDestination(NodeId dst);

    bool hasForDestination(NodeId dst) const;
    std::size_t size() const { return m_entries.size(); }
    SimTime timeout() const { return m_timeout; }

  private:
    std::size_t m_capacity;
    SimTime m_timeout;
    std::deque<Entry> m_entries;
};

/// Flood suppression: each (originator, flood id) is processed at most once
/// within the horizon.
class DuplicateCache {
  public:
    explicit DuplicateCache(SimTime horizon = SimTime::fromSeconds(10.0)) : m_horizon(horizon) {}

    /// Records the pair on first sight; true if already seen within horizon.
    bool isDuplicate(NodeId origin, std::uint32_t id, SimTime now);

  private:
    SimTime m_horizon;
    std::map<std::pair<NodeId, std::uint32_t>, SimTime> m_seen;
};

/// HELLO-based neighbor liveness shared by AODV and DYMO: a next hop is lost
/// when nothing was heard from it for allowedLoss * interval.
struct HelloMonitor {
    double intervalS = 1.0;
    int allowedLoss = 2;
    std::map<NodeId, SimTime> lastHeard;

    void heard(NodeId from, SimTime now) { lastHeard[from] = now; }
    bool lost(NodeId neighbor, SimTime now) const;
};

/// Routing-table row exposed for inspection (loop-freedom checks, tests).
struct RouteSnapshot {
    NodeId dest = 0;
    NodeId nextHop = 0;
    int hopCount = 0;
    bool valid = false;
};

struct PacketSizes {
    int rreqBytes = 64;
    int rrepBytes = 64;
    int rerrBytes = 64;
    int helloBytes = 32;
    int dataHeaderBytes = 32;
};

/// Everything a protocol instance needs to know about the run.
struct ProtocolConfig {
    Protocol protocol = Protocol::Aodv;
    ErsSchedule ers;
    PacketSizes sizes;
    std::size_t bufferCapacity = 64;
    double bufferTimeoutS = 30.0;
    double helloIntervalS = 1.0;
    int allowedHelloLoss = 2;
    double aodvRouteLifetimeS = 10.0;
    double dymoRouteLifetimeS = 5.0;
    int maxRepairHops = 10; // fallback LLR bound when the data source is unknown
    std::size_t dsrCacheCapacity = 1024; // DSR-M: 256
    int dymoRerrTtl = 3;
    int dataTtl = 35;
    int payloadBytes = 512;

    std::int64_t ctrlBits(PacketKind k) const;
    std::int64_t dataBits() const { return static_cast<std::int64_t>(payloadBytes + sizes.dataHeaderBytes) * 8; }
};

/// Engine services visible to protocol instances. One host per run; all
/// calls happen on the run's single thread.
class ProtocolHost {
  public:
    virtual ~ProtocolHost() = default;

    virtual SimTime now() const = 0;
    virtual Rng& rng() = 0;
    virtual const ProtocolConfig& protocolConfig() const = 0;
    virtual std::uint64_t nextPacketUid() = 0;

    virtual void sendBroadcast(NodeId from, Packet pkt) = 0;
    virtual void sendUnicast(NodeId from, NodeId to, Packet pkt) = 0;
    virtual void scheduleAt(SimTime at, std::function<void()> fn) = 0;

    /// DATA reached its destination.
    virtual void deliverData(NodeId at, const Packet& pkt) = 0;
    /// DATA left the system without being delivered.
    virtual void dropData(NodeId at, const Packet& pkt, DropReason reason) = 0;

    virtual TraceStats& trace() = 0;
    virtual void log(NodeId node, const char* kind, const Packet* pkt, const std::string& detail) = 0;

    /// AODV-LL: start the 10 ms link-layer beacon scan for this node.
    virtual void enableBeaconMonitor(NodeId node) = 0;
};

/// Per-node protocol state machine. The engine dispatches receptions, local
/// data requests, link-layer feedback and beacon verdicts into it.
class RoutingProtocol {
  public:
    virtual ~RoutingProtocol() = default;

    virtual void start() {}
    virtual void onDataRequest(Packet data) = 0;
    virtual void onReceive(Packet pkt) = 0;
    virtual void onOverhear(const Packet& /*pkt*/) {}
    virtual bool promiscuousMode() const { return false; }
    virtual void onUnicastFailed(Packet pkt, NodeId nextHop) = 0;
    virtual void onBeaconLinkBreak(NodeId /*neighbor*/) {}

    /// Next hops the link-layer beacon monitor should watch (AODV-LL).
    virtual std::set<NodeId> monitoredNextHops() const { return {}; }

    /// True when the node sits on at least one active route (HELLO gating,
    /// liveness sampling).
    virtual bool onActiveRoute() const = 0;

    virtual std::size_t bufferedDataCount() const = 0;

    virtual std::vector<RouteSnapshot> routeSnapshot() const { return {}; }
    virtual std::vector<std::vector<NodeId>> cachedPaths() const { return {}; }
};

} // namespace manet

#endif
