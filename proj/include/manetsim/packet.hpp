#ifndef MANETSIM_PACKET_HPP
#define MANETSIM_PACKET_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "manetsim/sim_time.hpp"

namespace manet {

enum class PacketKind : std::uint8_t { Rreq, Rrep, Rerr, Hello, Data };

const char* packetKindName(PacketKind k);

/// Pseudo-address for flooded control packets with no single recipient.
inline constexpr NodeId kBroadcast = 0xffffffffu;

/// Route request. AODV/DYMO use the sequence-number fields; DSR accumulates
/// the traversed route in routeRecord and may piggyback broken-link notices.
struct RreqPayload {
    std::uint32_t rreqId = 0;
    std::uint64_t origSeq = 0;
    bool destSeqKnown = false;
    std::uint64_t destSeq = 0;
    std::uint16_t hopCount = 0;
    std::vector<NodeId> routeRecord;
    std::vector<std::pair<NodeId, NodeId>> piggybackedBroken;
};

struct RrepPayload {
    std::uint64_t destSeq = 0;
    std::uint16_t hopCount = 0;
    bool gratuitous = false;
    NodeId replier = 0;
    std::vector<NodeId> path;        // full discovered route (DSR)
    std::vector<NodeId> returnRoute; // source route back to the originator (DSR)
    std::uint16_t returnCursor = 0;
};

struct RerrPayload {
    std::vector<std::pair<NodeId, std::uint64_t>> unreachable; // (dest, seq)
    bool hasBrokenLink = false;
    std::pair<NodeId, NodeId> brokenLink{0, 0}; // DSR: the failed hop
    NodeId floodOrigin = 0;                     // DYMO: RERR flood dedup key
    std::uint32_t floodId = 0;
    std::vector<NodeId> returnRoute; // DSR: source route back to the data source
    std::uint16_t returnCursor = 0;
};

struct HelloPayload {};

struct DataPayload {
    SimTime originatedAt{};
    std::uint32_t flowId = 0;
    std::vector<NodeId> sourceRoute; // DSR only
    std::uint16_t cursor = 0;        // index of the current holder in sourceRoute
    std::uint8_t salvageCount = 0;
};

using PacketPayload = std::variant<RreqPayload, RrepPayload, RerrPayload, HelloPayload, DataPayload>;

/// The wire-level unit. src/dst are the end-to-end endpoints; prevHop is the
/// node whose transmission delivered this copy.
struct Packet {
    PacketKind kind = PacketKind::Data;
    NodeId src = 0;
    NodeId dst = 0;
    NodeId prevHop = 0;
    int ttl = 0;
    std::int64_t sizeBits = 0;
    std::uint64_t uid = 0;
    PacketPayload payload;

    RreqPayload& rreq() { return std::get<RreqPayload>(payload); }
    const RreqPayload& rreq() const { return std::get<RreqPayload>(payload); }
    RrepPayload& rrep() { return std::get<RrepPayload>(payload); }
    const RrepPayload& rrep() const { return std::get<RrepPayload>(payload); }
    RerrPayload& rerr() { return std::get<RerrPayload>(payload); }
    const RerrPayload& rerr() const { return std::get<RerrPayload>(payload); }
    DataPayload& data() { return std::get<DataPayload>(payload); }
    const DataPayload& data() const { return std::get<DataPayload>(payload); }
};

} // namespace manet

#endif
