#ifndef MANETSIM_MOBILITY_HPP
#define MANETSIM_MOBILITY_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "manetsim/rng.hpp"
#include "manetsim/sim_time.hpp"

namespace manet {

struct Position {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Position& a, const Position& b);

struct LinkChange {
    SimTime at{};
    NodeId a = 0;
    NodeId b = 0;
    bool broken = false; // false = formed
};

/// Position source for the engine. Queries are per node at the current clock;
/// the engine never asks about the past.
class MobilityModel {
  public:
    virtual ~MobilityModel() = default;
    virtual Position positionAt(NodeId node, SimTime t) = 0;
    virtual std::size_t nodeCount() const = 0;
};

/// Random waypoint over a rectangle: every node pauses first, then repeats
/// uniform-waypoint legs at the scenario's fixed speed with a fixed pause.
/// Each node draws from its own substream so the trajectory depends only on
/// (seed, node), not on when the engine happens to query.
class RandomWaypointMobility : public MobilityModel {
  public:
    RandomWaypointMobility(std::size_t nodes, double widthM, double heightM, double speedMps,
                           double pauseS, std::uint64_t seed);

    Position positionAt(NodeId node, SimTime t) override;
    std::size_t nodeCount() const override { return m_nodes.size(); }

  private:
    struct NodeState {
        Rng rng;
        Position origin;
        Position target;
        SimTime segStart{};
        SimTime segEnd{};
        bool pausing = true;
        explicit NodeState(std::uint64_t s) : rng(s) {}
    };

    void advance(NodeState& st, SimTime t);
    Position drawWaypoint(NodeState& st);

    std::vector<NodeState> m_nodes;
    double m_width;
    double m_height;
    double m_speed;
    SimTime m_pause{};
};

/// Fixed positions plus optional scripted constant-speed legs; used by tests
/// that need a deterministic topology or a link break at a known instant.
class ScriptedMobility : public MobilityModel {
  public:
    explicit ScriptedMobility(std::vector<Position> initial)
        : m_initial(std::move(initial)), m_legs(m_initial.size()) {}

    /// Node moves from where its previous leg ended toward `to` starting at
    /// `start` (at `speedMps`), then holds position. Legs must be added in
    /// chronological order and must not overlap in time.
    void addLeg(NodeId node, SimTime start, Position to, double speedMps);

    Position positionAt(NodeId node, SimTime t) override;
    std::size_t nodeCount() const override { return m_initial.size(); }

  private:
    struct Leg {
        SimTime start{};
        Position to;
        double speed = 0.0;
    };
    std::vector<Position> m_initial;
    std::vector<std::vector<Leg>> m_legs;
};

} // namespace manet

#endif
