#include "manetsim/routing_common.hpp"

#include <algorithm>

namespace manet {

const char* protocolName(Protocol p) {
    switch (p) {
    case Protocol::Aodv:
        return "aodv";
    case Protocol::AodvLl:
        return "aodv-ll";
    case Protocol::Dsr:
        return "dsr";
    case Protocol::DsrM:
        return "dsr-m";
    case Protocol::Dymo:
        return "dymo";
    }
    return "?";
}

std::optional<Protocol> protocolFromName(const std::string& name) {
    if (name == "aodv") {
        return Protocol::Aodv;
    }
    if (name == "aodv-ll") {
        return Protocol::AodvLl;
    }
    if (name == "dsr") {
        return Protocol::Dsr;
    }
    if (name == "dsr-m") {
        return Protocol::DsrM;
    }
    if (name == "dymo") {
        return Protocol::Dymo;
    }
    return std::nullopt;
}

const char* dropReasonName(DropReason r) {
    switch (r) {
    case DropReason::BufferTimeout:
        return "buffer-timeout";
    case DropReason::BufferOverflow:
        return "buffer-overflow";
    case DropReason::NoRoute:
        return "no-route";
    case DropReason::RouteDiscoveryFailed:
        return "discovery-failed";
    case DropReason::LinkLost:
        return "link-lost";
    case DropReason::SalvageFailed:
        return "salvage-failed";
    case DropReason::RepairFailed:
        return "repair-failed";
    case DropReason::TtlExpired:
        return "ttl-expired";
    }
    return "?";
}

std::optional<ErsSchedule::Ring> ErsSchedule::next(int attempt) const {
    if (attempt < 0) {
        return std::nullopt;
    }
    if (attempt < ringedAttempts()) {
        const int ttl = ttlStart + attempt * ttlIncrement;
        return Ring{ttl, 2.0 * ringWaitPerTtlS * ttl};
    }
    if (attempt < totalAttempts()) {
        return Ring{netDiameter, 2.0 * ringWaitPerTtlS * netDiameter};
    }
    return std::nullopt;
}

std::optional<Packet> SendBuffer::push(Packet pkt, SimTime now) {
    std::optional<Packet> evicted;
    if (m_capacity == 0) {
        return pkt; // degenerate buffer rejects everything
    }
    if (m_entries.size() >= m_capacity) {
        evicted = std::move(m_entries.front().pkt);
        m_entries.pop_front();
    }
    m_entries.push_back(Entry{std::move(pkt), now});
    return evicted;
}

std::vector<Packet> SendBuffer::takeExpired(SimTime now) {
    // Entries are in enqueue order, so expired ones form a prefix.
    std::vector<Packet> out;
    while (!m_entries.empty() && now - m_entries.front().enqueuedAt >= m_timeout) {
        out.push_back(std::move(m_entries.front().pkt));
        m_entries.pop_front();
    }
    return out;
}

std::vector<Packet> SendBuffer::takeForDestination(NodeId dst) {
    std::vector<Packet> out;
    std::deque<Entry> keep;
    for (Entry& e : m_entries) {
        if (e.pkt.dst == dst) {
            out.push_back(std::move(e.pkt));
        } else {
            keep.push_back(std::move(e));
        }
    }
    m_entries.swap(keep);
    return out;
}

bool SendBuffer::hasForDestination(NodeId dst) const {
    return std::any_of(m_entries.begin(), m_entries.end(),
                       [dst](const Entry& e) { return e.pkt.dst == dst; });
}

bool DuplicateCache::isDuplicate(NodeId origin, std::uint32_t id, SimTime now) {
    for (auto it = m_seen.begin(); it != m_seen.end();) {
        if (now - it->second >= m_horizon) {
            it = m_seen.erase(it);
        } else {
            ++it;
        }
    }
    auto [it, inserted] = m_seen.emplace(std::make_pair(origin, id), now);
    (void)it;
    return !inserted;
}

bool HelloMonitor::lost(NodeId neighbor, SimTime now) const {
    const auto it = lastHeard.find(neighbor);
    if (it == lastHeard.end()) {
        return false; // never heard anything: no verdict yet
    }
    return (now - it->second).seconds() > intervalS * allowedLoss;
}

std::int64_t ProtocolConfig::ctrlBits(PacketKind k) const {
    switch (k) {
    case PacketKind::Rreq:
        return static_cast<std::int64_t>(sizes.rreqBytes) * 8;
    case PacketKind::Rrep:
        return static_cast<std::int64_t>(sizes.rrepBytes) * 8;
    case PacketKind::Rerr:
        return static_cast<std::int64_t>(sizes.rerrBytes) * 8;
    case PacketKind::Hello:
        return static_cast<std::int64_t>(sizes.helloBytes) * 8;
    case PacketKind::Data:
        return dataBits();
    }
    return 0;
}

} // namespace manet
