#ifndef MANETSIM_METRICS_HPP
#define MANETSIM_METRICS_HPP

#include <optional>

#include "manetsim/trace_stats.hpp"

namespace manet::metrics {

/// Delivered payload bits per second.
double throughput(const TraceStats& ts, double durationS);

/// Mean origination-to-delivery delay in seconds (buffering included);
/// absent when nothing was delivered.
std::optional<double> avgE2ed(const TraceStats& ts);

/// Normalized routing load: control transmissions (every hop-wise send
/// counts once) per delivered data packet; absent when nothing was
/// delivered. Counts packets, not bits.
std::optional<double> nrl(const TraceStats& ts);

} // namespace manet::metrics

#endif
