#include "manetsim/trace_stats.hpp"

namespace manet {

void EventLog::write(SimTime at, NodeId node, const char* kind, const Packet* pkt,
                     const std::string& detail) {
    if (!m_out) {
        return;
    }
    *m_out << at.us << '\t' << node << '\t' << kind << '\t';
    if (pkt) {
        *m_out << pkt->uid << '\t' << packetKindName(pkt->kind);
    } else {
        *m_out << '-' << '\t' << '-';
    }
    *m_out << '\t' << detail << '\n';
}

} // namespace manet
