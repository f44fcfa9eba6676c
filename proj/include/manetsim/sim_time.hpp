#ifndef MANETSIM_SIM_TIME_HPP
#define MANETSIM_SIM_TIME_HPP

#include <cmath>
#include <compare>
#include <cstdint>

namespace manet {

using NodeId = std::uint32_t;

/// Simulation clock value. Integer microseconds internally so that event
/// ordering is exact and runs replay bit-identically.
struct SimTime {
    std::int64_t us = 0;

    static constexpr SimTime fromUs(std::int64_t v) { return SimTime{v}; }
    static SimTime fromSeconds(double s) { return SimTime{static_cast<std::int64_t>(std::llround(s * 1e6))}; }
    static constexpr SimTime zero() { return SimTime{0}; }

    double seconds() const { return static_cast<double>(us) * 1e-6; }

    auto operator<=>(const SimTime&) const = default;

    SimTime operator+(SimTime other) const { return SimTime{us + other.us}; }
    SimTime operator-(SimTime other) const { return SimTime{us - other.us}; }
    SimTime& operator+=(SimTime other) { us += other.us; return *this; }
};

} // namespace manet

#endif
