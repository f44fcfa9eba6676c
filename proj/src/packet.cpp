#include "manetsim/packet.hpp"

namespace manet {

const char* packetKindName(PacketKind k) {
    switch (k) {
    case PacketKind::Rreq:
        return "RREQ";
    case PacketKind::Rrep:
        return "RREP";
    case PacketKind::Rerr:
        return "RERR";
    case PacketKind::Hello:
        return "HELLO";
    case PacketKind::Data:
        return "DATA";
    }
    return "?";
}

} // namespace manet
