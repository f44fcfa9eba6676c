#include "manetsim/metrics.hpp"

#include <numeric>

namespace manet::metrics {

double throughput(const TraceStats& ts, double durationS) {
    if (durationS <= 0.0) {
        return 0.0;
    }
    const double bits = static_cast<double>(ts.dataDelivered) *
                        static_cast<double>(ts.payloadBitsPerPacket);
    return bits / durationS;
}

std::optional<double> avgE2ed(const TraceStats& ts) {
    if (ts.deliveryDelays.empty()) {
        return std::nullopt;
    }
    const double sum = std::accumulate(ts.deliveryDelays.begin(), ts.deliveryDelays.end(), 0.0);
    return sum / static_cast<double>(ts.deliveryDelays.size());
}

std::optional<double> nrl(const TraceStats& ts) {
    if (ts.dataDelivered == 0) {
        return std::nullopt;
    }
    return static_cast<double>(ts.ctrlTotal()) / static_cast<double>(ts.dataDelivered);
}

} // namespace manet::metrics
