#include "manetsim/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace manet {

double distance(const Position& a, const Position& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

RandomWaypointMobility::RandomWaypointMobility(std::size_t nodes, double widthM, double heightM,
                                               double speedMps, double pauseS, std::uint64_t seed)
    : m_width(widthM), m_height(heightM), m_speed(speedMps), m_pause(SimTime::fromSeconds(pauseS)) {
    m_nodes.reserve(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        NodeState st(Rng::substream(seed, i));
        st.origin = drawWaypoint(st);
        st.target = st.origin;
        st.segStart = SimTime::zero();
        // Everybody starts paused; a nonpositive speed pins the node forever.
        st.segEnd = m_speed > 0.0 ? m_pause : SimTime::fromUs(std::numeric_limits<std::int64_t>::max());
        st.pausing = true;
        m_nodes.push_back(std::move(st));
    }
}

Position RandomWaypointMobility::drawWaypoint(NodeState& st) {
    // x before y; the draw order is part of the replay contract.
    const double x = st.rng.uniform(0.0, m_width);
    const double y = st.rng.uniform(0.0, m_height);
    return Position{x, y};
}

void RandomWaypointMobility::advance(NodeState& st, SimTime t) {
    while (t > st.segEnd) {
        if (st.pausing) {
            st.origin = st.target;
            st.target = drawWaypoint(st);
            st.segStart = st.segEnd;
            st.segEnd = st.segStart + SimTime::fromSeconds(distance(st.origin, st.target) / m_speed);
            st.pausing = false;
        } else {
            st.origin = st.target;
            st.segStart = st.segEnd;
            st.segEnd = st.segStart + m_pause;
            st.pausing = true;
        }
    }
}

Position RandomWaypointMobility::positionAt(NodeId node, SimTime t) {
    NodeState& st = m_nodes.at(node);
    advance(st, t);
    if (st.pausing) {
        return st.origin;
    }
    const double span = (st.segEnd - st.segStart).seconds();
    double f = span > 0.0 ? (t - st.segStart).seconds() / span : 1.0;
    f = std::clamp(f, 0.0, 1.0);
    return Position{st.origin.x + f * (st.target.x - st.origin.x),
                    st.origin.y + f * (st.target.y - st.origin.y)};
}

void ScriptedMobility::addLeg(NodeId node, SimTime start, Position to, double speedMps) {
    m_legs.at(node).push_back(Leg{start, to, speedMps});
}

Position ScriptedMobility::positionAt(NodeId node, SimTime t) {
    Position pos = m_initial.at(node);
    for (const Leg& leg : m_legs.at(node)) {
        if (t <= leg.start) {
            break;
        }
        const double d = distance(pos, leg.to);
        if (d == 0.0) {
            continue;
        }
        if (leg.speed <= 0.0) {
            break; // a leg that cannot move pins the node
        }
        const double travel = (t - leg.start).seconds() * leg.speed;
        if (travel >= d) {
            pos = leg.to;
            continue;
        }
        const double f = travel / d;
        return Position{pos.x + f * (leg.to.x - pos.x), pos.y + f * (leg.to.y - pos.y)};
    }
    return pos;
}

} // namespace manet
