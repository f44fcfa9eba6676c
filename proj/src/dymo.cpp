#include "manetsim/dymo.hpp"

#include <algorithm>

namespace manet {

DymoNode::DymoNode(NodeId self, ProtocolHost& host)
    : m_self(self), m_host(host),
      m_buffer(host.protocolConfig().bufferCapacity,
               SimTime::fromSeconds(host.protocolConfig().bufferTimeoutS)) {
    m_hello.intervalS = host.protocolConfig().helloIntervalS;
    m_hello.allowedLoss = host.protocolConfig().allowedHelloLoss;
}

void DymoNode::start() {
    m_host.scheduleAt(m_host.now() + SimTime::fromSeconds(m_host.protocolConfig().helloIntervalS),
                      [this] { helloTick(); });
}

DymoNode::RouteEntry* DymoNode::lookupValid(NodeId dst) {
    const auto it = m_table.find(dst);
    if (it == m_table.end() || !it->second.valid || it->second.expiry < m_host.now()) {
        return nullptr;
    }
    return &it->second;
}

void DymoNode::installRoute(NodeId dst, NodeId nextHop, int hopCount, std::uint64_t seq,
                            bool seqKnown) {
    if (dst == m_self) {
        return;
    }
    RouteEntry& e = m_table[dst];
    const bool usable = e.valid && e.expiry >= m_host.now();
    bool accept = false;
    if (!seqKnown) {
        accept = !usable;
        seq = e.seq;
        seqKnown = e.seqValid;
    } else if (!e.seqValid || seq > e.seq) {
        accept = true;
    } else if (seq == e.seq && (!usable || hopCount < e.hopCount)) {
        accept = true;
    }
    const SimTime until =
        m_host.now() + SimTime::fromSeconds(m_host.protocolConfig().dymoRouteLifetimeS);
    if (!accept) {
        if (usable && e.nextHop == nextHop && e.hopCount == hopCount && until > e.expiry) {
            e.expiry = until;
        }
        return;
    }
    e.seq = seq;
    e.seqValid = seqKnown;
    e.hopCount = hopCount;
    e.nextHop = nextHop;
    e.valid = true;
    e.expiry = until;
    m_hello.lastHeard.try_emplace(nextHop, m_host.now());

    if (const auto it = m_pending.find(dst); it != m_pending.end()) {
        m_host.trace().discoveriesSucceeded++;
        m_host.trace().discoveryDurations.push_back((m_host.now() - it->second.startedAt).seconds());
        m_pending.erase(it);
    }
    for (Packet& p : m_buffer.takeForDestination(dst)) {
        if (RouteEntry* r = lookupValid(dst)) {
            sendData(std::move(p), *r);
        } else {
            m_host.dropData(m_self, p, DropReason::NoRoute);
        }
    }
}

void DymoNode::sendData(Packet data, RouteEntry& e) {
    const SimTime until =
        m_host.now() + SimTime::fromSeconds(m_host.protocolConfig().dymoRouteLifetimeS);
    if (until > e.expiry) {
        e.expiry = until;
    }
    if (data.src != m_self) {
        if (data.ttl < 2) {
            m_host.dropData(m_self, data, DropReason::TtlExpired);
            return;
        }
        data.ttl--;
    }
    m_host.sendUnicast(m_self, e.nextHop, std::move(data));
}

void DymoNode::onDataRequest(Packet data) {
    if (data.dst == m_self) {
        m_host.deliverData(m_self, data);
        return;
    }
    const NodeId dst = data.dst;
    if (RouteEntry* e = lookupValid(dst)) {
        sendData(std::move(data), *e);
        return;
    }
    if (auto evicted = m_buffer.push(std::move(data), m_host.now())) {
        m_host.dropData(m_self, *evicted, DropReason::BufferOverflow);
    }
    if (!m_pending.count(dst)) {
        startDiscovery(dst);
    }
}

void DymoNode::startDiscovery(NodeId dst) {
    PendingDiscovery pd;
    pd.startedAt = m_host.now();
    pd.epoch = ++m_epoch;
    m_host.trace().discoveriesStarted++;
    const auto [it, inserted] = m_pending.emplace(dst, pd);
    (void)inserted;
    sendRreqAttempt(dst, it->second);
}

void DymoNode::sendRreqAttempt(NodeId dst, PendingDiscovery& pd) {
    const auto ring = m_host.protocolConfig().ers.next(pd.attempt);
    if (!ring) {
        return;
    }
    ++m_seq;
    ++m_rreqId;
    Packet rreq = makeControl(PacketKind::Rreq, dst, ring->ttl);
    RreqPayload& rq = rreq.rreq();
    rq.rreqId = m_rreqId;
    rq.origSeq = m_seq;
    m_seenRreq.isDuplicate(m_self, m_rreqId, m_host.now());
    m_host.sendBroadcast(m_self, std::move(rreq));
    const std::uint64_t epoch = pd.epoch;
    m_host.scheduleAt(m_host.now() + SimTime::fromSeconds(ring->waitS),
                      [this, dst, epoch] { onDiscoveryTimeout(dst, epoch); });
}

void DymoNode::onDiscoveryTimeout(NodeId dst, std::uint64_t epoch) {
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

void DymoNode::onReceive(Packet pkt) {
    m_hello.heard(pkt.prevHop, m_host.now());
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
        installRoute(pkt.prevHop, pkt.prevHop, 1, 0, false);
        break;
    case PacketKind::Data:
        handleData(std::move(pkt));
        break;
    }
}

void DymoNode::handleRreq(Packet pkt) {
    if (pkt.src == m_self) {
        return;
    }
    RreqPayload& rq = pkt.rreq();
    if (m_seenRreq.isDuplicate(pkt.src, rq.rreqId, m_host.now())) {
        return;
    }
    installRoute(pkt.src, pkt.prevHop, rq.hopCount + 1, rq.origSeq, true);
    if (pkt.dst == m_self) {
        // only the destination ever answers
        m_seq = std::max(m_seq, rq.destSeq) + 1;
        RouteEntry* back = lookupValid(pkt.src);
        if (!back) {
            return;
        }
        Packet rrep = makeControl(PacketKind::Rrep, pkt.src, m_host.protocolConfig().ers.netDiameter);
        RrepPayload& rp = rrep.rrep();
        rp.destSeq = m_seq;
        rp.hopCount = 0;
        rp.gratuitous = false;
        rp.replier = m_self;
        m_host.sendUnicast(m_self, back->nextHop, std::move(rrep));
        return;
    }
    if (pkt.ttl >= 2) {
        pkt.ttl--;
        rq.hopCount++;
        m_host.sendBroadcast(m_self, std::move(pkt));
    }
}

void DymoNode::handleRrep(Packet pkt) {
    RrepPayload& rp = pkt.rrep();
    installRoute(rp.replier, pkt.prevHop, rp.hopCount + 1, rp.destSeq, true);
    if (pkt.dst == m_self) {
        return;
    }
    RouteEntry* back = lookupValid(pkt.dst);
    if (!back || pkt.ttl < 2) {
        return;
    }
    pkt.ttl--;
    rp.hopCount++;
    m_host.sendUnicast(m_self, back->nextHop, std::move(pkt));
}

void DymoNode::handleRerr(Packet pkt) {
    RerrPayload& re = pkt.rerr();
    if (m_seenRerr.isDuplicate(re.floodOrigin, re.floodId, m_host.now())) {
        return;
    }
    for (const auto& [d, seq] : re.unreachable) {
        const auto it = m_table.find(d);
        if (it == m_table.end() || !it->second.valid || it->second.nextHop != pkt.prevHop) {
            continue;
        }
        it->second.valid = false;
        if (seq > it->second.seq) {
            it->second.seq = seq;
            it->second.seqValid = true;
        }
        if (m_buffer.hasForDestination(d) && !m_pending.count(d)) {
            startDiscovery(d);
        }
    }
    // the flood marches on whether or not it changed anything here
    if (pkt.ttl >= 2) {
        pkt.ttl--;
        m_host.sendBroadcast(m_self, std::move(pkt));
    }
}

void DymoNode::handleData(Packet pkt) {
    if (pkt.dst == m_self) {
        m_host.deliverData(m_self, pkt);
        return;
    }
    RouteEntry* e = lookupValid(pkt.dst);
    if (!e) {
        m_host.dropData(m_self, pkt, DropReason::NoRoute);
        return;
    }
    if (const auto rit = m_table.find(pkt.src); rit != m_table.end() && rit->second.valid) {
        const SimTime until =
            m_host.now() + SimTime::fromSeconds(m_host.protocolConfig().dymoRouteLifetimeS);
        if (until > rit->second.expiry) {
            rit->second.expiry = until;
        }
    }
    sendData(std::move(pkt), *e);
}

void DymoNode::helloTick() {
    const SimTime now = m_host.now();
    for (Packet& p : m_buffer.takeExpired(now)) {
        m_host.dropData(m_self, p, DropReason::BufferTimeout);
    }
    std::set<NodeId> inUse;
    for (const auto& [d, e] : m_table) {
        if (e.valid && e.expiry >= now) {
            inUse.insert(e.nextHop);
        }
    }
    for (NodeId nh : inUse) {
        if (m_hello.lost(nh, now)) {
            onLinkBroken(nh);
        }
    }
    if (onActiveRoute()) {
        m_host.sendBroadcast(m_self, makeControl(PacketKind::Hello, kBroadcast, 1));
    }
    m_host.scheduleAt(now + SimTime::fromSeconds(m_host.protocolConfig().helloIntervalS),
                      [this] { helloTick(); });
}

void DymoNode::onLinkBroken(NodeId nextHop) {
    m_hello.lastHeard.erase(nextHop);
    std::vector<std::pair<NodeId, std::uint64_t>> unreachable;
    for (auto& [d, e] : m_table) {
        if (!e.valid || e.nextHop != nextHop) {
            continue;
        }
        e.valid = false;
        if (e.seqValid) {
            e.seq++;
        }
        unreachable.push_back({d, e.seq});
    }
    if (unreachable.empty()) {
        return;
    }
    // TTL-bounded flood; everyone in the neighborhood re-evaluates
    Packet rerr = makeControl(PacketKind::Rerr, kBroadcast, m_host.protocolConfig().dymoRerrTtl);
    RerrPayload& re = rerr.rerr();
    re.unreachable = unreachable;
    re.floodOrigin = m_self;
    re.floodId = ++m_rerrId;
    m_seenRerr.isDuplicate(m_self, m_rerrId, m_host.now());
    m_host.sendBroadcast(m_self, std::move(rerr));
    for (const auto& [d, seq] : unreachable) {
        (void)seq;
        if (m_buffer.hasForDestination(d) && !m_pending.count(d)) {
            startDiscovery(d);
        }
    }
}

void DymoNode::onUnicastFailed(Packet pkt, NodeId nextHop) {
    (void)nextHop;
    // no link-layer feedback in this model: the loss is silent, HELLO
    // silence reveals the break later
    if (pkt.kind == PacketKind::Data) {
        m_host.dropData(m_self, pkt, DropReason::LinkLost);
    }
}

bool DymoNode::onActiveRoute() const {
    const SimTime now = m_host.now();
    for (const auto& [d, e] : m_table) {
        if (e.valid && e.expiry >= now) {
            return true;
        }
    }
    return false;
}

std::vector<RouteSnapshot> DymoNode::routeSnapshot() const {
    std::vector<RouteSnapshot> out;
    const SimTime now = m_host.now();
    for (const auto& [d, e] : m_table) {
        out.push_back(RouteSnapshot{d, e.nextHop, e.hopCount, e.valid && e.expiry >= now});
    }
    return out;
}

Packet DymoNode::makeControl(PacketKind kind, NodeId dst, int ttl) {
    Packet p;
    p.kind = kind;
    p.src = m_self;
    p.dst = dst;
    p.prevHop = m_self;
    p.ttl = ttl;
    p.sizeBits = m_host.protocolConfig().ctrlBits(kind);
    p.uid = m_host.nextPacketUid();
    switch (kind) {
    case PacketKind::Rreq:
        p.payload = RreqPayload{};
        break;
    case PacketKind::Rrep:
        p.payload = RrepPayload{};
        break;
    case PacketKind::Rerr:
        p.payload = RerrPayload{};
        break;
    case PacketKind::Hello:
        p.payload = HelloPayload{};
        break;
    case PacketKind::Data:
        p.payload = DataPayload{};
        break;
    }
    return p;
}

} // namespace manet
