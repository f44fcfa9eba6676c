#include "manetsim/dsr.hpp"

#include <algorithm>
#include <iterator>

namespace manet {

namespace {
constexpr std::uint8_t kMaxSalvages = 4;
} // namespace

// ---------------------------------------------------------------- RouteCache

bool RouteCache::insert(std::vector<NodeId> path) {
    if (path.size() < 2) {
        return false;
    }
    for (const auto& p : m_paths) {
        if (p == path) {
            return false; // exact duplicate
        }
    }
    bool evicted = false;
    if (m_paths.size() >= m_capacity) {
        m_paths.pop_front();
        m_evictions++;
        evicted = true;
    }
    m_paths.push_back(std::move(path));
    return evicted;
}

std::optional<std::vector<NodeId>> RouteCache::shortestTo(NodeId target) const {
    std::optional<std::vector<NodeId>> best;
    for (const auto& p : m_paths) {
        for (std::size_t i = 1; i < p.size(); ++i) {
            if (p[i] == target) {
                if (!best || i + 1 < best->size()) {
                    best = std::vector<NodeId>(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(i) + 1);
                }
                break;
            }
        }
    }
    return best;
}

void RouteCache::pruneLink(NodeId a, NodeId b) {
    std::deque<std::vector<NodeId>> keep;
    for (auto& p : m_paths) {
        std::size_t cut = p.size();
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            if ((p[i] == a && p[i + 1] == b) || (p[i] == b && p[i + 1] == a)) {
                cut = i + 1;
                break;
            }
        }
        if (cut >= p.size()) {
            keep.push_back(std::move(p));
            continue;
        }
        if (cut < 2) {
            continue; // nothing usable survives
        }
        std::vector<NodeId> prefix(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(cut));
        const bool dup = std::any_of(keep.begin(), keep.end(),
                                     [&](const std::vector<NodeId>& q) { return q == prefix; });
        if (!dup) {
            keep.push_back(std::move(prefix));
        }
    }
    m_paths.swap(keep);
}

// ------------------------------------------------------------------- DsrNode

DsrNode::DsrNode(NodeId self, ProtocolHost& host, std::size_t cacheCapacity)
    : m_self(self), m_host(host), m_cache(cacheCapacity),
      m_buffer(host.protocolConfig().bufferCapacity,
               SimTime::fromSeconds(host.protocolConfig().bufferTimeoutS)) {}

void DsrNode::onDataRequest(Packet data) {
    if (data.dst == m_self) {
        m_host.deliverData(m_self, data);
        return;
    }
    const NodeId dst = data.dst;
    if (const auto path = m_cache.shortestTo(dst)) {
        stampAndSend(std::move(data), *path);
        return;
    }
    if (auto evicted = m_buffer.push(std::move(data), m_host.now())) {
        m_host.dropData(m_self, *evicted, DropReason::BufferOverflow);
    }
    if (!m_pending.count(dst)) {
        startDiscovery(dst);
    }
}

void DsrNode::stampAndSend(Packet data, const std::vector<NodeId>& path) {
    DataPayload& dp = data.data();
    dp.sourceRoute = path;
    dp.cursor = 0;
    m_host.sendUnicast(m_self, path[1], std::move(data));
}

void DsrNode::startDiscovery(NodeId dst) {
    PendingDiscovery pd;
    pd.startedAt = m_host.now();
    pd.epoch = ++m_epoch;
    m_host.trace().discoveriesStarted++;
    const auto [it, inserted] = m_pending.emplace(dst, pd);
    (void)inserted;
    sendRreqAttempt(dst, it->second);
}

void DsrNode::sendRreqAttempt(NodeId dst, PendingDiscovery& pd) {
    const auto ring = m_host.protocolConfig().ers.next(pd.attempt);
    if (!ring) {
        return;
    }
    ++m_rreqId;
    Packet rreq;
    rreq.kind = PacketKind::Rreq;
    rreq.src = m_self;
    rreq.dst = dst;
    rreq.prevHop = m_self;
    rreq.ttl = ring->ttl;
    rreq.sizeBits = m_host.protocolConfig().ctrlBits(PacketKind::Rreq);
    rreq.uid = m_host.nextPacketUid();
    RreqPayload rq;
    rq.rreqId = m_rreqId;
    rq.routeRecord = {m_self};
    // broken links learned since the last flood ride along for free
    rq.piggybackedBroken.assign(m_piggybackQueue.begin(), m_piggybackQueue.end());
    m_piggybackQueue.clear();
    rreq.payload = std::move(rq);
    m_seenRreq.isDuplicate(m_self, m_rreqId, m_host.now());
    m_host.sendBroadcast(m_self, std::move(rreq));
    const std::uint64_t epoch = pd.epoch;
    m_host.scheduleAt(m_host.now() + SimTime::fromSeconds(ring->waitS),
                      [this, dst, epoch] { onDiscoveryTimeout(dst, epoch); });
}

void DsrNode::onDiscoveryTimeout(NodeId dst, std::uint64_t epoch) {
    const SimTime now = m_host.now();
    for (Packet& p : m_buffer.takeExpired(now)) {
        m_host.dropData(m_self, p, DropReason::BufferTimeout);
    }
    const auto it = m_pending.find(dst);
    if (it == m_pending.end() || it->second.epoch != epoch) {
        return;
    }
    PendingDiscovery& pd = it->second;
    pd.attempt++;
    if (m_host.protocolConfig().ers.next(pd.attempt)) {
        sendRreqAttempt(dst, pd);
        return;
    }
    m_host.trace().noRouteEvents++;
    m_pending.erase(it);
    for (Packet& p : m_buffer.takeForDestination(dst)) {
        m_host.dropData(m_self, p, DropReason::RouteDiscoveryFailed);
    }
}

void DsrNode::onReceive(Packet pkt) {
    switch (pkt.kind) {
    case PacketKind::Rreq:
        handleRreq(std::move(pkt));
        break;
    case PacketKind::Rrep:
        handleRrep(std::move(pkt));
        break;
    case PacketKind::Rerr:
        handleRerr(std::move(pkt));
        break;
    case PacketKind::Hello:
        break; // DSR never sends these
    case PacketKind::Data:
        handleData(std::move(pkt));
        break;
    }
}

void DsrNode::handleRreq(Packet pkt) {
    if (pkt.src == m_self) {
        return;
    }
    RreqPayload& rq = pkt.rreq();
    for (const auto& [a, b] : rq.piggybackedBroken) {
        m_cache.pruneLink(a, b);
    }
    if (std::find(rq.routeRecord.begin(), rq.routeRecord.end(), m_self) != rq.routeRecord.end()) {
        return; // already forwarded this copy
    }
    if (m_seenRreq.isDuplicate(pkt.src, rq.rreqId, m_host.now())) {
        return;
    }
    // the recorded route, reversed, is a path back to the originator
    std::vector<NodeId> back(rq.routeRecord.rbegin(), rq.routeRecord.rend());
    back.insert(back.begin(), m_self);
    learnFromPath(back);

    if (pkt.dst == m_self) {
        std::vector<NodeId> full = rq.routeRecord;
        full.push_back(m_self);
        Packet rrep = makeReply(pkt.src, std::move(full), back, false);
        m_host.sendUnicast(m_self, back[1], std::move(rrep));
        return;
    }
    if (const auto cached = m_cache.shortestTo(pkt.dst)) {
        // splice recorded prefix and cached suffix, refusing loops
        std::set<NodeId> seen(rq.routeRecord.begin(), rq.routeRecord.end());
        bool loop = false;
        for (NodeId n : *cached) {
            if (!seen.insert(n).second) {
                loop = true;
                break;
            }
        }
        if (!loop) {
            std::vector<NodeId> full = rq.routeRecord;
            full.insert(full.end(), cached->begin(), cached->end());
            Packet rrep = makeReply(pkt.src, std::move(full), back, true);
            m_host.sendUnicast(m_self, back[1], std::move(rrep));
            return;
        }
    }
    if (pkt.ttl >= 2) {
        pkt.ttl--;
        rq.hopCount++;
        rq.routeRecord.push_back(m_self);
        m_host.sendBroadcast(m_self, std::move(pkt));
    }
}

Packet DsrNode::makeReply(NodeId origin, std::vector<NodeId> path, const std::vector<NodeId>& back,
                          bool gratuitous) {
    Packet rrep;
    rrep.kind = PacketKind::Rrep;
    rrep.src = m_self;
    rrep.dst = origin;
    rrep.prevHop = m_self;
    rrep.ttl = static_cast<int>(back.size());
    rrep.sizeBits = m_host.protocolConfig().ctrlBits(PacketKind::Rrep);
    rrep.uid = m_host.nextPacketUid();
    RrepPayload rp;
    rp.gratuitous = gratuitous;
    rp.replier = m_self;
    rp.path = std::move(path);
    rp.returnRoute = back;
    rp.returnCursor = 0;
    rrep.payload = std::move(rp);
    return rrep;
}

void DsrNode::handleRrep(Packet pkt) {
    RrepPayload& rp = pkt.rrep();
    if (pkt.dst == m_self) {
        learnFromPath(rp.path); // settles the pending discovery and drains
        return;
    }
    // learn our own suffix of the discovered route while relaying
    const auto self = std::find(rp.path.begin(), rp.path.end(), m_self);
    if (self != rp.path.end()) {
        learnFromPath(std::vector<NodeId>(self, rp.path.end()));
    }
    const std::size_t pos = rp.returnCursor + 1u;
    if (pos + 1 >= rp.returnRoute.size() || rp.returnRoute[pos] != m_self) {
        return; // stale relay route; the reply dies here
    }
    rp.returnCursor = static_cast<std::uint16_t>(pos);
    const NodeId next = rp.returnRoute[pos + 1]; // before the move gutting rp
    m_host.sendUnicast(m_self, next, std::move(pkt));
}

void DsrNode::handleRerr(Packet pkt) {
    RerrPayload& re = pkt.rerr();
    if (re.hasBrokenLink) {
        m_cache.pruneLink(re.brokenLink.first, re.brokenLink.second);
    }
    if (pkt.dst == kBroadcast) {
        return; // one-hop advisory only
    }
    if (pkt.dst == m_self) {
        // the failed packet's source: start over for dests we still care about
        for (const auto& [d, seq] : re.unreachable) {
            (void)seq;
            if (!m_buffer.hasForDestination(d)) {
                continue;
            }
            if (m_cache.shortestTo(d)) {
                drainBuffer(d);
            } else if (!m_pending.count(d)) {
                startDiscovery(d);
            }
        }
        return;
    }
    const std::size_t pos = re.returnCursor + 1u;
    if (pos + 1 >= re.returnRoute.size() || re.returnRoute[pos] != m_self) {
        return;
    }
    re.returnCursor = static_cast<std::uint16_t>(pos);
    const NodeId next = re.returnRoute[pos + 1]; // before the move gutting re
    m_host.sendUnicast(m_self, next, std::move(pkt));
}

void DsrNode::handleData(Packet pkt) {
    if (pkt.dst == m_self) {
        m_host.deliverData(m_self, pkt);
        return;
    }
    DataPayload& dp = pkt.data();
    const std::vector<NodeId>& route = dp.sourceRoute;
    const std::size_t pos = dp.cursor + 1u;
    if (pos + 1 >= route.size() || route[pos] != m_self) {
        m_host.dropData(m_self, pkt, DropReason::NoRoute); // malformed source route
        return;
    }
    if (pkt.ttl < 2) {
        m_host.dropData(m_self, pkt, DropReason::TtlExpired);
        return;
    }
    pkt.ttl--;
    dp.cursor = static_cast<std::uint16_t>(pos);
    // passive learning in both directions; links are symmetric here
    learnFromPath(std::vector<NodeId>(route.begin() + static_cast<std::ptrdiff_t>(pos), route.end()));
    std::vector<NodeId> back(route.begin(), route.begin() + static_cast<std::ptrdiff_t>(pos) + 1);
    std::reverse(back.begin(), back.end());
    learnFromPath(back);
    const NodeId next = route[pos + 1]; // before the move gutting route
    m_host.sendUnicast(m_self, next, std::move(pkt));
}

void DsrNode::onUnicastFailed(Packet pkt, NodeId nextHop) {
    m_cache.pruneLink(m_self, nextHop);
    m_piggybackQueue.insert({m_self, nextHop});
    if (pkt.kind != PacketKind::Data) {
        return; // control packets die silently
    }
    m_host.trace().salvageAttempts++;
    salvage(std::move(pkt), nextHop);
}

void DsrNode::salvage(Packet pkt, NodeId brokenNext) {
    DataPayload& dp = pkt.data();
    const auto alt = m_cache.shortestTo(pkt.dst);
    if (!alt || dp.salvageCount >= kMaxSalvages || pkt.ttl < 2) {
        sendTargetedRerr(pkt, brokenNext);
        m_host.dropData(m_self, pkt, DropReason::SalvageFailed);
        return;
    }
    dp.salvageCount++;
    m_host.trace().salvages++;
    // one-hop advisory so neighbors stop using the dead link
    m_host.sendBroadcast(m_self, makeAdvisory(brokenNext));
    pkt.ttl--;
    dp.sourceRoute = *alt;
    dp.cursor = 0;
    m_host.sendUnicast(m_self, (*alt)[1], std::move(pkt));
}

Packet DsrNode::makeAdvisory(NodeId brokenNext) {
    Packet rerr;
    rerr.kind = PacketKind::Rerr;
    rerr.src = m_self;
    rerr.dst = kBroadcast;
    rerr.prevHop = m_self;
    rerr.ttl = 1;
    rerr.sizeBits = m_host.protocolConfig().ctrlBits(PacketKind::Rerr);
    rerr.uid = m_host.nextPacketUid();
    RerrPayload re;
    re.hasBrokenLink = true;
    re.brokenLink = {m_self, brokenNext};
    rerr.payload = std::move(re);
    return rerr;
}

void DsrNode::sendTargetedRerr(const Packet& failed, NodeId brokenNext) {
    if (failed.src == m_self) {
        return; // we are the source; the cache prune is enough
    }
    const DataPayload& dp = failed.data();
    const auto& sr = dp.sourceRoute;
    if (dp.cursor >= sr.size() || sr[dp.cursor] != m_self) {
        // rewritten routes on salvaged packets may not pass through us;
        // fall back to the one-hop advisory
        m_host.sendBroadcast(m_self, makeAdvisory(brokenNext));
        return;
    }
    std::vector<NodeId> back(sr.begin(), sr.begin() + static_cast<std::ptrdiff_t>(dp.cursor) + 1);
    std::reverse(back.begin(), back.end()); // ends at the route's head
    if (back.size() < 2) {
        return;
    }
    Packet rerr;
    rerr.kind = PacketKind::Rerr;
    rerr.src = m_self;
    rerr.dst = back.back();
    rerr.prevHop = m_self;
    rerr.ttl = static_cast<int>(back.size());
    rerr.sizeBits = m_host.protocolConfig().ctrlBits(PacketKind::Rerr);
    rerr.uid = m_host.nextPacketUid();
    RerrPayload re;
    re.hasBrokenLink = true;
    re.brokenLink = {m_self, brokenNext};
    re.unreachable = {{failed.dst, 0}};
    re.returnRoute = back;
    re.returnCursor = 0;
    rerr.payload = std::move(re);
    m_host.sendUnicast(m_self, back[1], std::move(rerr));
}

void DsrNode::onOverhear(const Packet& pkt) {
    const std::vector<NodeId>* route = visibleRoute(pkt);
    if (route) {
        learnOverheard(*route, pkt.prevHop);
    }
}

const std::vector<NodeId>* DsrNode::visibleRoute(const Packet& pkt) {
    switch (pkt.kind) {
    case PacketKind::Data: {
        const auto& sr = pkt.data().sourceRoute;
        return sr.empty() ? nullptr : &sr;
    }
    case PacketKind::Rrep: {
        const auto& p = pkt.rrep().path;
        return p.empty() ? nullptr : &p;
    }
    default:
        return nullptr;
    }
}

void DsrNode::learnOverheard(const std::vector<NodeId>& path, NodeId transmitter) {
    if (transmitter == m_self) {
        return;
    }
    const auto it = std::find(path.begin(), path.end(), transmitter);
    if (it == path.end()) {
        return;
    }
    // we can reach the transmitter directly, so both the rest of its route
    // and the already-covered part are one hop away
    std::vector<NodeId> onward;
    onward.push_back(m_self);
    onward.insert(onward.end(), it, path.end());
    learnFromPath(onward);
    std::vector<NodeId> back;
    back.push_back(m_self);
    back.insert(back.end(), std::make_reverse_iterator(it + 1), path.rend());
    learnFromPath(back);
}

void DsrNode::learnFromPath(const std::vector<NodeId>& path) {
    if (path.size() < 2 || path.front() != m_self) {
        return;
    }
    const std::set<NodeId> uniq(path.begin(), path.end());
    if (uniq.size() != path.size()) {
        return; // looped paths are useless
    }
    cacheInsert(path);
}

void DsrNode::cacheInsert(std::vector<NodeId> path) {
    if (path.size() < 2) {
        return;
    }
    const std::vector<NodeId> targets(path.begin() + 1, path.end());
    if (m_cache.insert(std::move(path))) {
        m_host.trace().cacheEvictions++;
    }
    for (NodeId t : targets) {
        resolveIfRouted(t);
    }
}

void DsrNode::resolveIfRouted(NodeId dst) {
    const auto it = m_pending.find(dst);
    if (it == m_pending.end() || !m_cache.shortestTo(dst)) {
        return;
    }
    m_host.trace().discoveriesSucceeded++;
    m_host.trace().discoveryDurations.push_back((m_host.now() - it->second.startedAt).seconds());
    m_pending.erase(it);
    drainBuffer(dst);
}

void DsrNode::drainBuffer(NodeId dst) {
    for (Packet& p : m_buffer.takeForDestination(dst)) {
        if (const auto path = m_cache.shortestTo(dst)) {
            stampAndSend(std::move(p), *path);
        } else {
            m_host.dropData(m_self, p, DropReason::NoRoute);
        }
    }
}

bool DsrNode::onActiveRoute() const {
    return m_buffer.size() > 0 || m_cache.size() > 0;
}

std::vector<std::vector<NodeId>> DsrNode::cachedPaths() const {
    return std::vector<std::vector<NodeId>>(m_cache.paths().begin(), m_cache.paths().end());
}

} // namespace manet
