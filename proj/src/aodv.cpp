#include "manetsim/aodv.hpp"

#include <algorithm>

namespace manet {

AodvNode::AodvNode(NodeId self, ProtocolHost& host, bool linkLayerFeedback)
    : m_self(self), m_host(host), m_ll(linkLayerFeedback),
      m_buffer(host.protocolConfig().bufferCapacity,
               SimTime::fromSeconds(host.protocolConfig().bufferTimeoutS)) {
    m_hello.intervalS = host.protocolConfig().helloIntervalS;
    m_hello.allowedLoss = host.protocolConfig().allowedHelloLoss;
}

void AodvNode::start() {
    m_host.scheduleAt(m_host.now() + SimTime::fromSeconds(m_host.protocolConfig().helloIntervalS),
                      [this] { helloTick(); });
    if (m_ll) {
        m_host.enableBeaconMonitor(m_self);
    }
}

AodvNode::RouteEntry* AodvNode::lookupValid(NodeId dst) {
    const auto it = m_table.find(dst);
    if (it == m_table.end() || !entryUsable(it->second)) {
        return nullptr;
    }
    return &it->second;
}

bool AodvNode::entryUsable(const RouteEntry& e) const {
    return e.state == EntryState::Valid && e.expiry >= m_host.now();
}

void AodvNode::refreshLifetime(RouteEntry& e) {
    const SimTime until =
        m_host.now() + SimTime::fromSeconds(m_host.protocolConfig().aodvRouteLifetimeS);
    if (until > e.expiry) {
        e.expiry = until;
    }
}

void AodvNode::installRoute(NodeId dst, NodeId nextHop, int hopCount, std::uint64_t seq,
                            bool seqKnown) {
    if (dst == m_self) {
        return;
    }
    RouteEntry& e = m_table[dst];
    bool accept = false;
    if (!seqKnown) {
        accept = !entryUsable(e);
        seq = e.destSeq; // keep whatever was known
        seqKnown = e.seqValid;
    } else if (!e.seqValid || seq > e.destSeq) {
        accept = true;
    } else if (seq == e.destSeq && (!entryUsable(e) || hopCount < e.hopCount)) {
        accept = true;
    }
    if (!accept) {
        // the same route seen again keeps the entry alive
        if (entryUsable(e) && e.nextHop == nextHop && e.hopCount == hopCount) {
            refreshLifetime(e);
        }
        return;
    }
    e.destSeq = seq;
    e.seqValid = seqKnown;
    e.hopCount = hopCount;
    e.nextHop = nextHop;
    e.state = EntryState::Valid;
    refreshLifetime(e);
    if (!m_ll) {
        // grace period: a just-installed next hop is trusted until HELLO
        // silence proves otherwise
        m_hello.lastHeard.try_emplace(nextHop, m_host.now());
    }

    // any event that yields a usable route settles pending work for dst
    if (const auto itp = m_pending.find(dst); itp != m_pending.end()) {
        m_host.trace().discoveriesSucceeded++;
        m_host.trace().discoveryDurations.push_back((m_host.now() - itp->second.startedAt).seconds());
        m_pending.erase(itp);
    }
    if (const auto itr = m_repairs.find(dst); itr != m_repairs.end()) {
        m_host.trace().repairsSucceeded++;
        m_host.trace().repairDurations.push_back((m_host.now() - itr->second.startedAt).seconds());
        m_repairs.erase(itr);
    }
    flushBuffer(dst);
}

void AodvNode::flushBuffer(NodeId dst) {
    if (!m_buffer.hasForDestination(dst)) {
        return;
    }
    for (Packet& p : m_buffer.takeForDestination(dst)) {
        if (RouteEntry* e = lookupValid(dst)) {
            sendData(std::move(p), *e);
        } else {
            m_host.dropData(m_self, p, DropReason::NoRoute);
        }
    }
}

void AodvNode::sendData(Packet data, RouteEntry& e) {
    e.lastDataSource = data.src;
    refreshLifetime(e);
    if (data.src != m_self) {
        if (data.ttl < 2) {
            m_host.dropData(m_self, data, DropReason::TtlExpired);
            return;
        }
        data.ttl--;
    }
    m_host.sendUnicast(m_self, e.nextHop, std::move(data));
}

void AodvNode::onDataRequest(Packet data) {
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
    const auto it = m_table.find(dst);
    if (it != m_table.end() && it->second.state == EntryState::UnderRepair) {
        return; // a repair is already under way
    }
    if (!m_pending.count(dst)) {
        startDiscovery(dst);
    }
}

void AodvNode::startDiscovery(NodeId dst) {
    PendingDiscovery pd;
    pd.startedAt = m_host.now();
    pd.epoch = ++m_epoch;
    const auto it = m_table.find(dst);
    pd.requestedSeqKnown = it != m_table.end() && it->second.seqValid;
    pd.requestedSeq = pd.requestedSeqKnown ? it->second.destSeq : 0;
    m_host.trace().discoveriesStarted++;
    const auto [pit, inserted] = m_pending.emplace(dst, pd);
    (void)inserted;
    sendRreqAttempt(dst, pit->second);
}

void AodvNode::sendRreqAttempt(NodeId dst, PendingDiscovery& pd) {
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
    rq.destSeqKnown = pd.requestedSeqKnown;
    rq.destSeq = pd.requestedSeq;
    // suppress echoed copies of our own flood
    m_seenRreq.isDuplicate(m_self, m_rreqId, m_host.now());
    m_host.sendBroadcast(m_self, std::move(rreq));
    const std::uint64_t epoch = pd.epoch;
    m_host.scheduleAt(m_host.now() + SimTime::fromSeconds(ring->waitS),
                      [this, dst, epoch] { onDiscoveryTimeout(dst, epoch); });
}

void AodvNode::onDiscoveryTimeout(NodeId dst, std::uint64_t epoch) {
    const auto it = m_pending.find(dst);
    if (it == m_pending.end() || it->second.epoch != epoch) {
        return; // resolved or superseded in the meantime
    }
    PendingDiscovery& pd = it->second;
    pd.attempt++;
    if (m_host.protocolConfig().ers.next(pd.attempt)) {
        sendRreqAttempt(dst, pd);
        return;
    }
    // search exhausted: shed everything queued for dst
    m_host.trace().noRouteEvents++;
    m_pending.erase(it);
    for (Packet& p : m_buffer.takeForDestination(dst)) {
        m_host.dropData(m_self, p, DropReason::RouteDiscoveryFailed);
    }
}

void AodvNode::onReceive(Packet pkt) {
    if (!m_ll) {
        m_hello.heard(pkt.prevHop, m_host.now());
    }
    switch (pkt.kind) {
    case PacketKind::Rreq:
        handleRreq(std::move(pkt));
        break;
    case PacketKind::Rrep:
        handleRrep(std::move(pkt));
        break;
    case PacketKind::Rerr:
        handleRerr(pkt);
        break;
    case PacketKind::Hello:
        handleHello(pkt);
        break;
    case PacketKind::Data:
        handleData(std::move(pkt));
        break;
    }
}

void AodvNode::handleRreq(Packet pkt) {
    if (pkt.src == m_self) {
        return; // our own flood echoed back
    }
    RreqPayload& rq = pkt.rreq();
    if (m_seenRreq.isDuplicate(pkt.src, rq.rreqId, m_host.now())) {
        return;
    }
    // reverse route toward the originator
    installRoute(pkt.src, pkt.prevHop, rq.hopCount + 1, rq.origSeq, true);
    if (pkt.dst == m_self) {
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
    // an intermediate node with a fresh-enough route answers from its table
    if (RouteEntry* e = lookupValid(pkt.dst)) {
        const bool fresh = e->seqValid && (!rq.destSeqKnown || e->destSeq >= rq.destSeq);
        if (fresh) {
            if (RouteEntry* back = lookupValid(pkt.src)) {
                Packet rrep =
                    makeControl(PacketKind::Rrep, pkt.src, m_host.protocolConfig().ers.netDiameter);
                RrepPayload& rp = rrep.rrep();
                rp.destSeq = e->destSeq;
                rp.hopCount = e->hopCount;
                rp.gratuitous = true;
                rp.replier = pkt.dst;
                // wire precursors both ways so a later break is reported along
                // the spliced route
                e->precursors.insert(back->nextHop);
                back->precursors.insert(e->nextHop);
                m_host.sendUnicast(m_self, back->nextHop, std::move(rrep));
                return;
            }
        }
    }
    if (pkt.ttl >= 2) {
        pkt.ttl--;
        rq.hopCount++;
        m_host.sendBroadcast(m_self, std::move(pkt));
    }
}

void AodvNode::handleRrep(Packet pkt) {
    RrepPayload& rp = pkt.rrep();
    installRoute(rp.replier, pkt.prevHop, rp.hopCount + 1, rp.destSeq, true);
    if (pkt.dst == m_self) {
        return; // discovery or repair settled by the install
    }
    RouteEntry* back = lookupValid(pkt.dst);
    if (!back || pkt.ttl < 2) {
        return; // reverse route evaporated; the reply dies here
    }
    pkt.ttl--;
    rp.hopCount++;
    if (const auto it = m_table.find(rp.replier); it != m_table.end()) {
        it->second.precursors.insert(back->nextHop);
    }
    back->precursors.insert(pkt.prevHop);
    m_host.sendUnicast(m_self, back->nextHop, std::move(pkt));
}

void AodvNode::handleRerr(const Packet& pkt) {
    const RerrPayload& re = pkt.rerr();
    std::set<NodeId> recipients;
    std::vector<std::pair<NodeId, std::uint64_t>> forward;
    for (const auto& [d, seq] : re.unreachable) {
        const auto it = m_table.find(d);
        if (it == m_table.end()) {
            continue;
        }
        RouteEntry& e = it->second;
        if (e.state != EntryState::Valid || e.nextHop != pkt.prevHop) {
            continue;
        }
        e.state = EntryState::Invalid;
        if (seq > e.destSeq) {
            e.destSeq = seq;
            e.seqValid = true;
        }
        if (!e.precursors.empty()) {
            recipients.insert(e.precursors.begin(), e.precursors.end());
            forward.push_back({d, e.destSeq});
        }
        e.precursors.clear();
        // a source with waiting traffic starts over
        if (m_buffer.hasForDestination(d) && !m_pending.count(d) && !m_repairs.count(d)) {
            startDiscovery(d);
        }
    }
    if (!forward.empty()) {
        sendRerr(recipients, forward);
    }
}

void AodvNode::handleHello(const Packet& pkt) {
    installRoute(pkt.prevHop, pkt.prevHop, 1, 0, false);
}

void AodvNode::handleData(Packet pkt) {
    if (pkt.dst == m_self) {
        m_host.deliverData(m_self, pkt);
        return;
    }
    const auto it = m_table.find(pkt.dst);
    if (it != m_table.end() && it->second.state == EntryState::UnderRepair) {
        if (auto evicted = m_buffer.push(std::move(pkt), m_host.now())) {
            m_host.dropData(m_self, *evicted, DropReason::BufferOverflow);
        }
        return;
    }
    RouteEntry* e = lookupValid(pkt.dst);
    if (!e) {
        // no usable route at a forwarder: tell the upstream and shed the packet
        std::uint64_t seq = 0;
        if (it != m_table.end()) {
            if (it->second.seqValid) {
                it->second.destSeq++;
            }
            seq = it->second.destSeq;
            it->second.state = EntryState::Invalid;
        }
        sendRerr({pkt.prevHop}, {{pkt.dst, seq}});
        m_host.dropData(m_self, pkt, DropReason::NoRoute);
        return;
    }
    // keep the reverse route warm while traffic flows
    if (const auto rit = m_table.find(pkt.src);
        rit != m_table.end() && rit->second.state == EntryState::Valid) {
        refreshLifetime(rit->second);
    }
    e->precursors.insert(pkt.prevHop);
    sendData(std::move(pkt), *e);
}

void AodvNode::helloTick() {
    const SimTime now = m_host.now();
    for (Packet& p : m_buffer.takeExpired(now)) {
        m_host.dropData(m_self, p, DropReason::BufferTimeout);
    }
    if (!m_ll) {
        std::set<NodeId> inUse;
        for (const auto& [d, e] : m_table) {
            if (e.state == EntryState::Valid && e.expiry >= now) {
                inUse.insert(e.nextHop);
            }
        }
        for (NodeId nh : inUse) {
            if (m_hello.lost(nh, now)) {
                handleLinkBreak(nh);
            }
        }
        if (onActiveRoute()) {
            m_host.sendBroadcast(m_self, makeControl(PacketKind::Hello, kBroadcast, 1));
        }
    }
    m_host.scheduleAt(now + SimTime::fromSeconds(m_host.protocolConfig().helloIntervalS),
                      [this] { helloTick(); });
}

void AodvNode::handleLinkBreak(NodeId nextHop) {
    if (!m_ll) {
        m_hello.lastHeard.erase(nextHop);
    }
    const SimTime now = m_host.now();
    std::vector<NodeId> lost;
    std::vector<NodeId> repairable;
    for (auto& [d, e] : m_table) {
        if (e.state != EntryState::Valid || e.nextHop != nextHop) {
            continue;
        }
        if (e.expiry < now) {
            e.state = EntryState::Invalid;
            continue;
        }
        // local repair is for nodes forwarding someone else's traffic on a
        // reasonably short remaining stretch; the source itself rediscovers
        bool eligible = e.lastDataSource && *e.lastDataSource != m_self &&
                        e.hopCount <= m_host.protocolConfig().maxRepairHops;
        if (eligible) {
            repairable.push_back(d);
        } else {
            lost.push_back(d);
        }
    }
    for (NodeId d : repairable) {
        startLocalRepair(d, m_table.at(d));
    }
    invalidateAndReport(lost);
}

void AodvNode::startLocalRepair(NodeId dst, RouteEntry& e) {
    e.state = EntryState::UnderRepair;
    m_host.trace().repairsAttempted++;
    m_host.trace().repairAttemptTimes.push_back(m_host.now().seconds());
    const std::uint64_t epoch = ++m_epoch;
    m_repairs[dst] = PendingRepair{m_host.now(), epoch};

    const auto& cfg = m_host.protocolConfig();
    const int ttl = std::clamp(e.hopCount + 2, 1, cfg.ers.netDiameter);
    ++m_seq;
    ++m_rreqId;
    Packet rreq = makeControl(PacketKind::Rreq, dst, ttl);
    RreqPayload& rq = rreq.rreq();
    rq.rreqId = m_rreqId;
    rq.origSeq = m_seq;
    rq.destSeqKnown = true;
    rq.destSeq = e.destSeq + 1; // only strictly fresher answers repair the route
    m_seenRreq.isDuplicate(m_self, m_rreqId, m_host.now());
    m_host.sendBroadcast(m_self, std::move(rreq));

    const double waitS = 2.0 * cfg.ers.ringWaitPerTtlS * ttl;
    m_host.scheduleAt(m_host.now() + SimTime::fromSeconds(waitS),
                      [this, dst, epoch] { onRepairTimeout(dst, epoch); });
}

void AodvNode::onRepairTimeout(NodeId dst, std::uint64_t epoch) {
    const auto it = m_repairs.find(dst);
    if (it == m_repairs.end() || it->second.epoch != epoch) {
        return;
    }
    m_repairs.erase(it);
    m_host.trace().repairsFailed++;
    const auto tit = m_table.find(dst);
    if (tit != m_table.end() && tit->second.state == EntryState::UnderRepair) {
        invalidateAndReport({dst});
    }
    for (Packet& p : m_buffer.takeForDestination(dst)) {
        m_host.dropData(m_self, p, DropReason::RepairFailed);
    }
}

void AodvNode::invalidateAndReport(const std::vector<NodeId>& dests) {
    std::set<NodeId> recipients;
    std::vector<std::pair<NodeId, std::uint64_t>> unreachable;
    for (NodeId d : dests) {
        const auto it = m_table.find(d);
        if (it == m_table.end()) {
            continue;
        }
        RouteEntry& e = it->second;
        e.state = EntryState::Invalid;
        if (e.seqValid) {
            e.destSeq++;
        }
        if (!e.precursors.empty()) {
            recipients.insert(e.precursors.begin(), e.precursors.end());
            unreachable.push_back({d, e.destSeq});
            e.precursors.clear();
        }
    }
    sendRerr(recipients, unreachable);
}

void AodvNode::sendRerr(const std::set<NodeId>& recipients,
                        const std::vector<std::pair<NodeId, std::uint64_t>>& unreachable) {
    if (recipients.empty() || unreachable.empty()) {
        return;
    }
    Packet rerr = makeControl(PacketKind::Rerr, kBroadcast, 1);
    rerr.rerr().unreachable = unreachable;
    if (recipients.size() == 1) {
        rerr.dst = *recipients.begin();
        m_host.sendUnicast(m_self, rerr.dst, std::move(rerr));
    } else {
        m_host.sendBroadcast(m_self, std::move(rerr));
    }
}

void AodvNode::onUnicastFailed(Packet pkt, NodeId nextHop) {
    if (!m_ll) {
        // no link-layer feedback: the frame is simply lost, HELLO silence
        // reveals the break later
        if (pkt.kind == PacketKind::Data) {
            m_host.dropData(m_self, pkt, DropReason::LinkLost);
        }
        return;
    }
    handleLinkBreak(nextHop);
    if (pkt.kind != PacketKind::Data) {
        return;
    }
    const auto it = m_table.find(pkt.dst);
    if (it != m_table.end() && it->second.state == EntryState::UnderRepair) {
        if (auto evicted = m_buffer.push(std::move(pkt), m_host.now())) {
            m_host.dropData(m_self, *evicted, DropReason::BufferOverflow);
        }
        return;
    }
    if (pkt.src == m_self) {
        const NodeId dst = pkt.dst;
        if (auto evicted = m_buffer.push(std::move(pkt), m_host.now())) {
            m_host.dropData(m_self, *evicted, DropReason::BufferOverflow);
        }
        if (!m_pending.count(dst) && !lookupValid(dst)) {
            startDiscovery(dst);
        }
        return;
    }
    m_host.dropData(m_self, pkt, DropReason::LinkLost);
}

void AodvNode::onBeaconLinkBreak(NodeId neighbor) {
    if (m_ll) {
        handleLinkBreak(neighbor);
    }
}

std::set<NodeId> AodvNode::monitoredNextHops() const {
    std::set<NodeId> out;
    const SimTime now = m_host.now();
    for (const auto& [d, e] : m_table) {
        if (e.state == EntryState::Valid && e.expiry >= now) {
            out.insert(e.nextHop);
        }
    }
    return out;
}

bool AodvNode::onActiveRoute() const {
    const SimTime now = m_host.now();
    for (const auto& [d, e] : m_table) {
        if (e.state == EntryState::Valid && e.expiry >= now) {
            return true;
        }
    }
    return false;
}

std::vector<RouteSnapshot> AodvNode::routeSnapshot() const {
    std::vector<RouteSnapshot> out;
    const SimTime now = m_host.now();
    for (const auto& [d, e] : m_table) {
        out.push_back(RouteSnapshot{d, e.nextHop, e.hopCount,
                                    e.state == EntryState::Valid && e.expiry >= now});
    }
    return out;
}

Packet AodvNode::makeControl(PacketKind kind, NodeId dst, int ttl) {
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
