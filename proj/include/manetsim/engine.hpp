#ifndef MANETSIM_ENGINE_HPP
#define MANETSIM_ENGINE_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <vector>

#include "manetsim/event_queue.hpp"
#include "manetsim/mobility.hpp"
#include "manetsim/packet.hpp"
#include "manetsim/routing_common.hpp"
#include "manetsim/rng.hpp"
#include "manetsim/scenario.hpp"
#include "manetsim/trace_stats.hpp"

namespace manet {

enum class TxMode : std::uint8_t { Broadcast, Unicast };

/// One radio transmission, recorded for post-hoc bandwidth verification.
struct TxRecord {
    NodeId node = 0;
    SimTime start{};
    SimTime end{};
    std::int64_t bits = 0;
    PacketKind kind = PacketKind::Data;
};

/// Deterministic discrete-event core plus run wiring: clock, event queue,
/// seeded RNG, unit-disk channel, FIFO transceiver MAC with link-layer
/// feedback and promiscuous delivery, random-waypoint mobility, CBR traffic
/// and per-node protocol instances.
class Simulation : public ProtocolHost {
  public:
    explicit Simulation(const Scenario& scenario, std::ostream* eventLog = nullptr);
    Simulation(const Scenario& scenario, std::unique_ptr<MobilityModel> mobility,
               std::ostream* eventLog = nullptr);
    ~Simulation() override;

    /// Injects one DATA origination; call before run(). With flows = 0 this
    /// is the only traffic source (used by tests).
    void injectData(SimTime at, NodeId src, NodeId dst);

    void run();

    // --- ProtocolHost ---
    SimTime now() const override { return m_now; }
    Rng& rng() override { return m_rng; }
    const ProtocolConfig& protocolConfig() const override { return m_protocolConfig; }
    std::uint64_t nextPacketUid() override { return ++m_lastUid; }
    void sendBroadcast(NodeId from, Packet pkt) override;
    void sendUnicast(NodeId from, NodeId to, Packet pkt) override;
    void scheduleAt(SimTime at, std::function<void()> fn) override;
    void deliverData(NodeId at, const Packet& pkt) override;
    void dropData(NodeId at, const Packet& pkt, DropReason reason) override;
    TraceStats& trace() override { return m_trace; }
    void log(NodeId node, const char* kind, const Packet* pkt, const std::string& detail) override;
    void enableBeaconMonitor(NodeId node) override;

    // --- queries ---
    /// Exact unit-disk neighbor set at time `at` (boundary inclusive).
    std::vector<NodeId> neighborsOf(NodeId node, SimTime at);
    bool inRange(NodeId a, NodeId b, SimTime at);

    const TraceStats& stats() const { return m_trace; }
    const Scenario& scenario() const { return m_scenario; }
    const std::vector<TxRecord>& txRecords() const { return m_txRecords; }
    const RoutingProtocol& protocolAt(NodeId node) const { return *m_protocols[node]; }

    std::vector<RouteSnapshot> routeSnapshot(NodeId node) const { return m_protocols[node]->routeSnapshot(); }
    std::vector<std::vector<NodeId>> cachedPaths(NodeId node) const { return m_protocols[node]->cachedPaths(); }

    /// DATA packets alive inside engine structures (radio queues, in-air
    /// deliveries, protocol buffers); the conservation identity compares
    /// this structural count against originated - delivered - dropped.
    std::uint64_t countInFlightData() const;

  private:
    struct Frame {
        Packet pkt;
        TxMode mode = TxMode::Broadcast;
        NodeId to = 0;
    };

    struct Radio {
        std::deque<Frame> queue;
        bool busy = false;
    };

    struct BeaconWatch {
        int consecutiveFailures = 0;
    };

    void setup();
    void originate(NodeId src, NodeId dst, std::uint32_t flowId);
    void flowTick(std::uint32_t flowId, NodeId src, NodeId dst, SimTime period);
    void enqueueFrame(NodeId from, Frame frame);
    void startTransmission(NodeId from);
    void finishTransmission(NodeId from);
    void accountBandwidth(NodeId node, SimTime start, SimTime end, std::int64_t bits, PacketKind kind);
    void deliver(NodeId at, Packet pkt, bool promiscuous);
    void finalizeData(const Packet& pkt);
    void linkScan();
    void beaconScan(NodeId node);
    void scheduleTraffic();

    Scenario m_scenario;
    ProtocolConfig m_protocolConfig;
    SimTime m_horizon{};
    SimTime m_now{};
    EventQueue m_queue;
    Rng m_rng;
    std::uint64_t m_lastUid = 0;

    std::unique_ptr<MobilityModel> m_mobility;
    std::vector<std::unique_ptr<RoutingProtocol>> m_protocols;
    std::vector<Radio> m_radios;
    std::vector<std::map<NodeId, BeaconWatch>> m_beaconWatches;
    std::vector<bool> m_beaconActive;

    std::set<std::pair<NodeId, NodeId>> m_physicalLinks;
    bool m_linksInitialized = false;
    double m_degreeSum = 0.0;
    std::uint64_t m_degreeSamples = 0;

    TraceStats m_trace;
    std::vector<TxRecord> m_txRecords;
    std::ostream* m_eventLog = nullptr;

    std::uint64_t m_dataInAir = 0; // DATA frames between tx completion and delivery bookkeeping
    std::set<std::uint64_t> m_liveData;  // originated, not yet delivered or dropped (debug cross-check)
    std::set<std::uint64_t> m_finalized; // every uid ever delivered or dropped
    bool m_ran = false;
};

} // namespace manet

#endif
