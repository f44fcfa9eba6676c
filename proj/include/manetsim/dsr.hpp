#ifndef MANETSIM_DSR_HPP
#define MANETSIM_DSR_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "manetsim/routing_common.hpp"

namespace manet {

/// Capacity-bounded path cache. Paths are rooted at the owning node; there is
/// no timeout-based expiry — entries leave only through RERR-driven link
/// pruning or FIFO capacity eviction. DSR-M shrinks the capacity 1024 -> 256.
class RouteCache {
  public:
    explicit RouteCache(std::size_t capacity) : m_capacity(capacity) {}

    /// Stores a path (self, ..., x). Exact duplicates are ignored.
    /// Returns true when a capacity eviction happened.
    bool insert(std::vector<NodeId> path);

    /// Shortest stored path prefix from self to target, if any.
    std::optional<std::vector<NodeId>> shortestTo(NodeId target) const;

    /// Truncates every path at the broken adjacency (either direction).
    void pruneLink(NodeId a, NodeId b);

    std::size_t size() const { return m_paths.size(); }
    std::uint64_t evictions() const { return m_evictions; }
    const std::deque<std::vector<NodeId>>& paths() const { return m_paths; }

  private:
    std::size_t m_capacity;
    std::deque<std::vector<NodeId>> m_paths; // insertion order = eviction order
    std::uint64_t m_evictions = 0;
};

/// DSR: source routing, cache-first discovery, gratuitous replies from
/// caches, packet salvaging with RERR on success and piggybacked RERR on
/// failure, promiscuous listening. DSR-M is the same machine with the small
/// cache.
class DsrNode : public RoutingProtocol {
  public:
    DsrNode(NodeId self, ProtocolHost& host, std::size_t cacheCapacity);

    void onDataRequest(Packet data) override;
    void onReceive(Packet pkt) override;
    void onOverhear(const Packet& pkt) override;
    bool promiscuousMode() const override { return true; }
    void onUnicastFailed(Packet pkt, NodeId nextHop) override;
    bool onActiveRoute() const override;
    std::size_t bufferedDataCount() const override { return m_buffer.size(); }
    std::vector<std::vector<NodeId>> cachedPaths() const override;

    const RouteCache& cache() const { return m_cache; }

  private:
    struct PendingDiscovery {
        int attempt = 0;
        SimTime startedAt{};
        std::uint64_t epoch = 0;
    };

    void startDiscovery(NodeId dst);
    void sendRreqAttempt(NodeId dst, PendingDiscovery& pd);
    void onDiscoveryTimeout(NodeId dst, std::uint64_t epoch);
    void handleRreq(Packet pkt);
    void handleRrep(Packet pkt);
    void handleRerr(Packet pkt);
    void handleData(Packet pkt);

    void stampAndSend(Packet data, const std::vector<NodeId>& path);
    Packet makeReply(NodeId origin, std::vector<NodeId> path, const std::vector<NodeId>& back,
                     bool gratuitous);
    Packet makeAdvisory(NodeId brokenNext);
    void salvage(Packet pkt, NodeId brokenNext);
    void sendTargetedRerr(const Packet& failed, NodeId brokenNext);
    void learnFromPath(const std::vector<NodeId>& path);
    void learnOverheard(const std::vector<NodeId>& path, NodeId transmitter);
    void cacheInsert(std::vector<NodeId> path);
    void resolveIfRouted(NodeId dst);
    void drainBuffer(NodeId dst);
    static const std::vector<NodeId>* visibleRoute(const Packet& pkt);

    NodeId m_self;
    ProtocolHost& m_host;
    RouteCache m_cache;
    SendBuffer m_buffer;
    DuplicateCache m_seenRreq;
    std::map<NodeId, PendingDiscovery> m_pending;
    std::set<std::pair<NodeId, NodeId>> m_piggybackQueue; // broken links to announce
    std::uint32_t m_rreqId = 0;
    std::uint64_t m_epoch = 0;
};

} // namespace manet

#endif
