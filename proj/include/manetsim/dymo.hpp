#ifndef MANETSIM_DYMO_HPP
#define MANETSIM_DYMO_HPP

#include <cstdint>
#include <map>
#include <set>

#include "manetsim/routing_common.hpp"

namespace manet {

/// DYMO: plain expanding-ring discovery where only the destination replies,
/// HELLO link monitoring with AODV's parameters, and a TTL-bounded RERR
/// flood on any detected break. No gratuitous replies, no cache, no
/// salvaging, no local repair.
class DymoNode : public RoutingProtocol {
  public:
    DymoNode(NodeId self, ProtocolHost& host);

    void start() override;
    void onDataRequest(Packet data) override;
    void onReceive(Packet pkt) override;
    void onUnicastFailed(Packet pkt, NodeId nextHop) override;
    bool onActiveRoute() const override;
    std::size_t bufferedDataCount() const override { return m_buffer.size(); }
    std::vector<RouteSnapshot> routeSnapshot() const override;

  private:
    struct RouteEntry {
        std::uint64_t seq = 0;
        bool seqValid = false;
        int hopCount = 0;
        NodeId nextHop = 0;
        SimTime expiry{};
        bool valid = false;
    };

    struct PendingDiscovery {
        int attempt = 0;
        SimTime startedAt{};
        std::uint64_t epoch = 0;
    };

    RouteEntry* lookupValid(NodeId dst);
    void installRoute(NodeId dst, NodeId nextHop, int hopCount, std::uint64_t seq, bool seqKnown);
    void sendData(Packet data, RouteEntry& e);

    void startDiscovery(NodeId dst);
    void sendRreqAttempt(NodeId dst, PendingDiscovery& pd);
    void onDiscoveryTimeout(NodeId dst, std::uint64_t epoch);
    void handleRreq(Packet pkt);
    void handleRrep(Packet pkt);
    void handleRerr(Packet pkt);
    void handleData(Packet pkt);
    void helloTick();
    void onLinkBroken(NodeId nextHop);

    Packet makeControl(PacketKind kind, NodeId dst, int ttl);

    NodeId m_self;
    ProtocolHost& m_host;
    std::uint64_t m_seq = 0;
    std::uint32_t m_rreqId = 0;
    std::uint32_t m_rerrId = 0;
    std::uint64_t m_epoch = 0;
    std::map<NodeId, RouteEntry> m_table;
    std::map<NodeId, PendingDiscovery> m_pending;
    SendBuffer m_buffer;
    DuplicateCache m_seenRreq;
    DuplicateCache m_seenRerr;
    HelloMonitor m_hello;
};

} // namespace manet

#endif
