#include "manetsim/engine.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "manetsim/aodv.hpp"
#include "manetsim/dsr.hpp"
#include "manetsim/dymo.hpp"

namespace manet {

namespace {
constexpr std::int64_t kBeaconPeriodUs = 10'000;    // 100 Hz link-layer beacon
constexpr int kBeaconFailureThreshold = 8;          // consecutive misses per break verdict
constexpr double kBroadcastJitterUs = 10'000.0;     // uniform [0, 10 ms]
constexpr std::uint32_t kInjectedFlowId = 0xffffffffu;
} // namespace

Simulation::Simulation(const Scenario& scenario, std::ostream* eventLog)
    : Simulation(scenario,
                 std::make_unique<RandomWaypointMobility>(scenario.nodes, scenario.areaWidthM,
                                                          scenario.areaHeightM, scenario.speedMps,
                                                          scenario.pauseS, scenario.seed),
                 eventLog) {}

Simulation::Simulation(const Scenario& scenario, std::unique_ptr<MobilityModel> mobility,
                       std::ostream* eventLog)
    : m_scenario(scenario), m_horizon(SimTime::fromSeconds(scenario.durationS)),
      m_rng(Rng::substream(scenario.seed, 0x1000003)), m_mobility(std::move(mobility)),
      m_eventLog(eventLog) {
    m_scenario.validate();
    if (!m_mobility || m_mobility->nodeCount() != m_scenario.nodes) {
        throw std::invalid_argument("mobility model does not cover the scenario's nodes");
    }
    setup();
}

Simulation::~Simulation() = default;

void Simulation::setup() {
    m_protocolConfig.protocol = m_scenario.protocol;
    m_protocolConfig.payloadBytes = m_scenario.packetBytes;
    if (m_scenario.protocol == Protocol::DsrM) {
        m_protocolConfig.dsrCacheCapacity = 256;
    }

    m_radios.resize(m_scenario.nodes);
    m_beaconWatches.resize(m_scenario.nodes);
    m_beaconActive.assign(m_scenario.nodes, false);

    m_protocols.reserve(m_scenario.nodes);
    for (NodeId n = 0; n < m_scenario.nodes; ++n) {
        switch (m_scenario.protocol) {
        case Protocol::Aodv:
            m_protocols.push_back(std::make_unique<AodvNode>(n, *this, false));
            break;
        case Protocol::AodvLl:
            m_protocols.push_back(std::make_unique<AodvNode>(n, *this, true));
            break;
        case Protocol::Dsr:
        case Protocol::DsrM:
            m_protocols.push_back(
                std::make_unique<DsrNode>(n, *this, m_protocolConfig.dsrCacheCapacity));
            break;
        case Protocol::Dymo:
            m_protocols.push_back(std::make_unique<DymoNode>(n, *this));
            break;
        }
    }

    m_trace.payloadBitsPerPacket = static_cast<std::int64_t>(m_scenario.packetBytes) * 8;

    m_queue.schedule(SimTime::zero(), [this] { linkScan(); });
    scheduleTraffic();
    for (auto& p : m_protocols) {
        p->start();
    }
}

void Simulation::injectData(SimTime at, NodeId src, NodeId dst) {
    if (m_ran) {
        throw std::logic_error("injectData must be called before run()");
    }
    if (src >= m_scenario.nodes || dst >= m_scenario.nodes || src == dst) {
        throw std::invalid_argument("bad injection endpoints");
    }
    m_queue.schedule(at, [this, src, dst] { originate(src, dst, kInjectedFlowId); });
}

void Simulation::run() {
    if (m_ran) {
        throw std::logic_error("Simulation::run may only be called once");
    }
    m_ran = true;
    while (!m_queue.empty() && m_queue.nextTime() <= m_horizon) {
        m_now = m_queue.nextTime();
        auto fn = m_queue.pop();
        fn();
    }
    m_now = m_horizon;
    if (m_degreeSamples > 0) {
        m_trace.avgNodeDegree = m_degreeSum / static_cast<double>(m_degreeSamples);
    }
    m_trace.dataInFlightAtEnd = countInFlightData();
    if (m_trace.dataInFlightAtEnd != m_liveData.size()) {
        throw std::logic_error("in-flight walk disagrees with the live-packet ledger");
    }
}

void Simulation::originate(NodeId src, NodeId dst, std::uint32_t flowId) {
    Packet pkt;
    pkt.kind = PacketKind::Data;
    pkt.src = src;
    pkt.dst = dst;
    pkt.prevHop = src;
    pkt.ttl = m_protocolConfig.dataTtl;
    pkt.sizeBits = m_protocolConfig.dataBits();
    pkt.uid = nextPacketUid();
    DataPayload dp;
    dp.originatedAt = m_now;
    dp.flowId = flowId;
    pkt.payload = std::move(dp);
    m_trace.dataOriginated++;
    m_liveData.insert(pkt.uid);
    log(src, "originate", &pkt, "dst=" + std::to_string(dst));
    m_protocols[src]->onDataRequest(std::move(pkt));
}

void Simulation::flowTick(std::uint32_t flowId, NodeId src, NodeId dst, SimTime period) {
    originate(src, dst, flowId);
    const SimTime next = m_now + period;
    if (next < m_horizon) {
        m_queue.schedule(next, [this, flowId, src, dst, period] { flowTick(flowId, src, dst, period); });
    }
}

void Simulation::scheduleTraffic() {
    if (m_scenario.flows == 0) {
        return;
    }
    std::vector<NodeId> ids(m_scenario.nodes);
    std::iota(ids.begin(), ids.end(), 0u);
    for (std::size_t i = ids.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(m_rng.uniformInt(0, static_cast<std::int64_t>(i)));
        std::swap(ids[i], ids[j]);
    }
    const double periodS = 1.0 / m_scenario.trafficPps;
    const SimTime period = SimTime::fromSeconds(periodS);
    for (std::uint32_t f = 0; f < m_scenario.flows; ++f) {
        const NodeId src = ids[2 * f];
        const NodeId dst = ids[2 * f + 1];
        const SimTime start = SimTime::fromSeconds(m_rng.uniform01() * periodS);
        m_queue.schedule(start, [this, f, src, dst, period] { flowTick(f, src, dst, period); });
    }
}

void Simulation::sendBroadcast(NodeId from, Packet pkt) {
    pkt.prevHop = from;
    const auto jitter =
        SimTime::fromUs(static_cast<std::int64_t>(m_rng.uniform01() * kBroadcastJitterUs));
    Frame frame{std::move(pkt), TxMode::Broadcast, kBroadcast};
    m_queue.schedule(m_now + jitter, [this, from, frame = std::move(frame)]() mutable {
        enqueueFrame(from, std::move(frame));
    });
}

void Simulation::sendUnicast(NodeId from, NodeId to, Packet pkt) {
    pkt.prevHop = from;
    enqueueFrame(from, Frame{std::move(pkt), TxMode::Unicast, to});
}

void Simulation::scheduleAt(SimTime at, std::function<void()> fn) {
    m_queue.schedule(at < m_now ? m_now : at, std::move(fn));
}

void Simulation::enqueueFrame(NodeId from, Frame frame) {
    Radio& r = m_radios[from];
    r.queue.push_back(std::move(frame));
    if (!r.busy) {
        startTransmission(from);
    }
}

void Simulation::startTransmission(NodeId from) {
    Radio& r = m_radios[from];
    r.busy = true;
    const Frame& f = r.queue.front();
    const std::int64_t bits = f.pkt.sizeBits;
    const std::int64_t bw = m_scenario.bandwidthBps;
    const std::int64_t airUs = (bits * 1'000'000 + bw - 1) / bw;
    const SimTime end = m_now + SimTime::fromUs(airUs);

    switch (f.pkt.kind) {
    case PacketKind::Rreq:
        m_trace.ctrlRreq++;
        break;
    case PacketKind::Rrep:
        if (f.pkt.rrep().gratuitous) {
            m_trace.ctrlGratRrep++;
        } else {
            m_trace.ctrlRrep++;
        }
        break;
    case PacketKind::Rerr:
        m_trace.ctrlRerr++;
        break;
    case PacketKind::Hello:
        m_trace.ctrlHello++;
        // HELLO fires once per interval per node on an active route, so each
        // transmission stands for interval seconds of route-in-use time.
        m_trace.activeRouteNodeSeconds += m_protocolConfig.helloIntervalS;
        break;
    case PacketKind::Data:
        m_trace.dataTransmissions++;
        break;
    }
    m_txRecords.push_back(TxRecord{from, m_now, end, bits, f.pkt.kind});
    accountBandwidth(from, m_now, end, bits, f.pkt.kind);
    log(from, "tx", &f.pkt,
        f.mode == TxMode::Unicast ? "to=" + std::to_string(f.to) : std::string("bcast"));
    m_queue.schedule(end, [this, from] { finishTransmission(from); });
}

void Simulation::finishTransmission(NodeId from) {
    Radio& r = m_radios[from];
    Frame frame = std::move(r.queue.front());
    r.queue.pop_front();
    r.busy = false;

    if (frame.mode == TxMode::Broadcast) {
        for (NodeId nb : neighborsOf(from, m_now)) {
            deliver(nb, frame.pkt, false);
        }
    } else {
        // bystanders in promiscuous mode hear the frame whether or not the
        // addressee was still reachable
        for (NodeId nb : neighborsOf(from, m_now)) {
            if (nb != frame.to && m_protocols[nb]->promiscuousMode()) {
                deliver(nb, frame.pkt, true);
            }
        }
        if (inRange(from, frame.to, m_now)) {
            deliver(frame.to, std::move(frame.pkt), false);
        } else {
            log(from, "tx-fail", &frame.pkt, "to=" + std::to_string(frame.to));
            m_protocols[from]->onUnicastFailed(std::move(frame.pkt), frame.to);
        }
    }
    // the failure handler may already have queued a retry
    if (!r.busy && !r.queue.empty()) {
        startTransmission(from);
    }
}

void Simulation::accountBandwidth(NodeId node, SimTime start, SimTime end, std::int64_t bits,
                                  PacketKind kind) {
    const std::int64_t s = start.us;
    const std::int64_t e = end.us;
    const std::int64_t span = e - s;
    if (span <= 0) {
        return;
    }
    for (std::int64_t bin = s / 1'000'000; bin * 1'000'000 < e; ++bin) {
        const std::int64_t bs = std::max(s, bin * 1'000'000);
        const std::int64_t be = std::min(e, (bin + 1) * 1'000'000);
        const double add =
            static_cast<double>(bits) * static_cast<double>(be - bs) / static_cast<double>(span);
        BinBits& bb = m_trace.perNodeSecondBits[{node, bin}];
        switch (kind) {
        case PacketKind::Data:
            bb.dataBits += add;
            break;
        case PacketKind::Rreq:
        case PacketKind::Rrep:
            bb.rdCtrlBits += add;
            break;
        case PacketKind::Rerr:
        case PacketKind::Hello:
            bb.rmCtrlBits += add;
            break;
        }
    }
}

void Simulation::deliver(NodeId at, Packet pkt, bool promiscuous) {
    if (promiscuous) {
        m_protocols[at]->onOverhear(pkt);
        return;
    }
    if (pkt.kind == PacketKind::Rerr) {
        m_trace.rerrReceptions++;
    }
    log(at, "rx", &pkt, "from=" + std::to_string(pkt.prevHop));
    m_protocols[at]->onReceive(std::move(pkt));
}

void Simulation::deliverData(NodeId at, const Packet& pkt) {
    finalizeData(pkt);
    m_trace.dataDelivered++;
    m_trace.deliveryDelays.push_back((m_now - pkt.data().originatedAt).seconds());
    log(at, "delivered", &pkt, "src=" + std::to_string(pkt.src));
}

void Simulation::dropData(NodeId at, const Packet& pkt, DropReason reason) {
    finalizeData(pkt);
    m_trace.dataDropped++;
    log(at, "drop", &pkt, dropReasonName(reason));
}

void Simulation::finalizeData(const Packet& pkt) {
    // Packets fed straight into the MAC (bypassing originate) are legal, but
    // nothing may be delivered or dropped twice.
    if (!m_finalized.insert(pkt.uid).second) {
        throw std::logic_error("data packet finalized twice");
    }
    m_liveData.erase(pkt.uid);
}

void Simulation::log(NodeId node, const char* kind, const Packet* pkt, const std::string& detail) {
    if (!m_eventLog) {
        return;
    }
    EventLog(m_eventLog).write(m_now, node, kind, pkt, detail);
}

void Simulation::enableBeaconMonitor(NodeId node) {
    if (m_beaconActive[node]) {
        return;
    }
    m_beaconActive[node] = true;
    m_queue.schedule(m_now + SimTime::fromUs(kBeaconPeriodUs), [this, node] { beaconScan(node); });
}

void Simulation::beaconScan(NodeId node) {
    auto& watches = m_beaconWatches[node];
    const std::set<NodeId> targets = m_protocols[node]->monitoredNextHops();
    for (auto it = watches.begin(); it != watches.end();) {
        if (!targets.count(it->first)) {
            it = watches.erase(it);
        } else {
            ++it;
        }
    }
    for (NodeId nh : targets) {
        BeaconWatch& w = watches[nh];
        if (inRange(node, nh, m_now)) {
            w.consecutiveFailures = 0;
        } else if (++w.consecutiveFailures >= kBeaconFailureThreshold) {
            w.consecutiveFailures = 0;
            log(node, "beacon-break", nullptr, "next_hop=" + std::to_string(nh));
            m_protocols[node]->onBeaconLinkBreak(nh);
        }
    }
    const SimTime next = m_now + SimTime::fromUs(kBeaconPeriodUs);
    if (next <= m_horizon) {
        m_queue.schedule(next, [this, node] { beaconScan(node); });
    }
}

std::vector<NodeId> Simulation::neighborsOf(NodeId node, SimTime at) {
    std::vector<NodeId> out;
    const Position p = m_mobility->positionAt(node, at);
    for (NodeId j = 0; j < m_scenario.nodes; ++j) {
        if (j == node) {
            continue;
        }
        if (distance(p, m_mobility->positionAt(j, at)) <= m_scenario.rangeM) {
            out.push_back(j);
        }
    }
    return out;
}

bool Simulation::inRange(NodeId a, NodeId b, SimTime at) {
    if (a == b) {
        return false;
    }
    return distance(m_mobility->positionAt(a, at), m_mobility->positionAt(b, at)) <=
           m_scenario.rangeM;
}

void Simulation::linkScan() {
    std::vector<Position> pos(m_scenario.nodes);
    for (NodeId i = 0; i < m_scenario.nodes; ++i) {
        pos[i] = m_mobility->positionAt(i, m_now);
    }
    std::set<std::pair<NodeId, NodeId>> links;
    for (NodeId i = 0; i < m_scenario.nodes; ++i) {
        for (NodeId j = i + 1; j < m_scenario.nodes; ++j) {
            if (distance(pos[i], pos[j]) <= m_scenario.rangeM) {
                links.insert({i, j});
            }
        }
    }

    if (m_linksInitialized) {
        for (const auto& l : m_physicalLinks) {
            if (!links.count(l)) {
                m_trace.linkBreaks++;
                m_trace.linkChangeTimes.push_back(m_now.seconds());
                log(l.first, "link-break", nullptr,
                    std::to_string(l.first) + "-" + std::to_string(l.second));
            }
        }
        for (const auto& l : links) {
            if (!m_physicalLinks.count(l)) {
                m_trace.linkForms++;
                m_trace.linkChangeTimes.push_back(m_now.seconds());
            }
        }
    } else {
        m_linksInitialized = true;
    }
    m_physicalLinks = std::move(links);
    m_degreeSum += 2.0 * static_cast<double>(m_physicalLinks.size()) /
                   static_cast<double>(m_scenario.nodes);
    m_degreeSamples++;

    const SimTime next = m_now + SimTime::fromSeconds(m_scenario.linkScanDtS);
    if (next <= m_horizon) {
        m_queue.schedule(next, [this] { linkScan(); });
    }
}

std::uint64_t Simulation::countInFlightData() const {
    std::uint64_t n = m_dataInAir;
    for (const auto& p : m_protocols) {
        n += p->bufferedDataCount();
    }
    for (const Radio& r : m_radios) {
        for (const Frame& f : r.queue) {
            if (f.pkt.kind == PacketKind::Data) {
                ++n;
            }
        }
    }
    return n;
}

} // namespace manet
