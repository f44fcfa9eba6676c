#ifndef MANETSIM_AODV_HPP
#define MANETSIM_AODV_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>

#include "manetsim/routing_common.hpp"

namespace manet {

/// AODV: sequence-numbered routing table, expanding-ring discovery with
/// gratuitous replies from intermediate nodes, HELLO link monitoring, local
/// link repair and precursor-directed RERR. The AODV-LL variant disables
/// HELLO and takes link verdicts from the engine's 100 Hz beacon monitor and
/// from unicast transmit failures instead.
class AodvNode : public RoutingProtocol {
  public:
    AodvNode(NodeId self, ProtocolHost& host, bool linkLayerFeedback);

    void start() override;
    void onDataRequest(Packet data) override;
    void onReceive(Packet pkt) override;
    void onUnicastFailed(Packet pkt, NodeId nextHop) override;
    void onBeaconLinkBreak(NodeId neighbor) override;
    std::set<NodeId> monitoredNextHops() const override;
    bool onActiveRoute() const override;
    std::size_t bufferedDataCount() const override { return m_buffer.size(); }
    std::vector<RouteSnapshot> routeSnapshot() const override;

  public:
    enum class EntryState : std::uint8_t { Valid, Invalid, UnderRepair };

    struct RouteEntry {
        std::uint64_t destSeq = 0;
        bool seqValid = false;
        int hopCount = 0;
        NodeId nextHop = 0;
        SimTime expiry{};
        EntryState state = EntryState::Invalid;
        std::set<NodeId> precursors;
        std::optional<NodeId> lastDataSource;
    };

  private:
    struct PendingDiscovery {
        int attempt = 0;
        std::uint64_t requestedSeq = 0;
        bool requestedSeqKnown = false;
        SimTime startedAt{};
        std::uint64_t epoch = 0;
    };

    struct PendingRepair {
        SimTime startedAt{};
        std::uint64_t epoch = 0;
    };

    RouteEntry* lookupValid(NodeId dst);
    bool entryUsable(const RouteEntry& e) const;
    void installRoute(NodeId dst, NodeId nextHop, int hopCount, std::uint64_t seq, bool seqKnown);
    void refreshLifetime(RouteEntry& e);
    void sendData(Packet data, RouteEntry& e);
    void flushBuffer(NodeId dst);

    void startDiscovery(NodeId dst);
    void sendRreqAttempt(NodeId dst, PendingDiscovery& pd);
    void onDiscoveryTimeout(NodeId dst, std::uint64_t epoch);
    void handleRreq(Packet pkt);
    void handleRrep(Packet pkt);
    void handleRerr(const Packet& pkt);
    void handleHello(const Packet& pkt);
    void handleData(Packet pkt);
    void helloTick();

    void handleLinkBreak(NodeId nextHop);
    void startLocalRepair(NodeId dst, RouteEntry& e);
    void onRepairTimeout(NodeId dst, std::uint64_t epoch);
    void invalidateAndReport(const std::vector<NodeId>& dests);
    void sendRerr(const std::set<NodeId>& recipients,
                  const std::vector<std::pair<NodeId, std::uint64_t>>& unreachable);

    Packet makeControl(PacketKind kind, NodeId dst, int ttl);

    NodeId m_self;
    ProtocolHost& m_host;
    bool m_ll; // AODV-LL variant
    std::uint64_t m_seq = 0;
    std::uint32_t m_rreqId = 0;
    std::uint64_t m_epoch = 0;
    std::map<NodeId, RouteEntry> m_table;
    std::map<NodeId, PendingDiscovery> m_pending;
    std::map<NodeId, PendingRepair> m_repairs;
    SendBuffer m_buffer;
    DuplicateCache m_seenRreq;
    HelloMonitor m_hello;
};

} // namespace manet

#endif
