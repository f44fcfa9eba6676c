#include "manetsim/scenario.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace manet {

namespace {

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parseReal(const KeyValueLine& kv) {
    double v = 0.0;
    const char* first = kv.value.data();
    const char* last = first + kv.value.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ConfigError(kv.line, kv.key, "expected a number, got '" + kv.value + "'");
    }
    return v;
}

std::uint64_t parseUnsigned(const KeyValueLine& kv) {
    std::uint64_t v = 0;
    const char* first = kv.value.data();
    const char* last = first + kv.value.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ConfigError(kv.line, kv.key, "expected a nonnegative integer, got '" + kv.value + "'");
    }
    return v;
}

/// Compact decimal used in scenario ids: integral values lose the fraction.
std::string fmtCompact(double v) {
    if (v == static_cast<double>(static_cast<std::int64_t>(v))) {
        return std::to_string(static_cast<std::int64_t>(v));
    }
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

ConfigError::ConfigError(int lineNo, std::string fieldName, const std::string& msg)
    : std::runtime_error(fieldName.empty() ? "config error (line " + std::to_string(lineNo) + "): " + msg
                                           : "config error (line " + std::to_string(lineNo) + ", " +
                                                 fieldName + "): " + msg),
      line(lineNo), field(std::move(fieldName)) {}

std::vector<KeyValueLine> parseKeyValueLines(const std::string& text) {
    std::vector<KeyValueLine> out;
    std::istringstream in(text);
    std::string raw;
    int lineNo = 0;
    while (std::getline(in, raw)) {
        ++lineNo;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) {
            raw.erase(hash);
        }
        const std::string line = trimmed(raw);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(lineNo, "", "expected 'key = value', got '" + line + "'");
        }
        KeyValueLine kv;
        kv.line = lineNo;
        kv.key = trimmed(line.substr(0, eq));
        kv.value = trimmed(line.substr(eq + 1));
        if (kv.key.empty()) {
            throw ConfigError(lineNo, "", "missing key before '='");
        }
        if (kv.value.empty()) {
            throw ConfigError(lineNo, kv.key, "missing value");
        }
        out.push_back(std::move(kv));
    }
    return out;
}

std::string readTextFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(0, "file", "cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void applyScenarioKey(Scenario& sc, const KeyValueLine& kv) {
    if (kv.key == "protocol") {
        const auto p = protocolFromName(kv.value);
        if (!p) {
            throw ConfigError(kv.line, kv.key,
                              "unknown protocol '" + kv.value +
                                  "' (expected aodv, aodv-ll, dsr, dsr-m or dymo)");
        }
        sc.protocol = *p;
    } else if (kv.key == "nodes") {
        sc.nodes = static_cast<std::uint32_t>(parseUnsigned(kv));
    } else if (kv.key == "area_width_m") {
        sc.areaWidthM = parseReal(kv);
    } else if (kv.key == "area_height_m") {
        sc.areaHeightM = parseReal(kv);
    } else if (kv.key == "speed_mps") {
        sc.speedMps = parseReal(kv);
    } else if (kv.key == "pause_s") {
        sc.pauseS = parseReal(kv);
    } else if (kv.key == "traffic_pps") {
        sc.trafficPps = parseReal(kv);
    } else if (kv.key == "flows") {
        sc.flows = static_cast<std::uint32_t>(parseUnsigned(kv));
    } else if (kv.key == "packet_bytes") {
        sc.packetBytes = static_cast<int>(parseUnsigned(kv));
    } else if (kv.key == "duration_s") {
        sc.durationS = parseReal(kv);
    } else if (kv.key == "seed") {
        sc.seed = parseUnsigned(kv);
    } else if (kv.key == "bandwidth_bps") {
        sc.bandwidthBps = static_cast<std::int64_t>(parseUnsigned(kv));
    } else if (kv.key == "range_m") {
        sc.rangeM = parseReal(kv);
    } else if (kv.key == "link_scan_dt_s") {
        sc.linkScanDtS = parseReal(kv);
    } else {
        throw ConfigError(kv.line, kv.key, "unknown key");
    }
}

void Scenario::validate() const {
    const auto fail = [](const std::string& field, const std::string& msg) {
        throw ConfigError(0, field, msg);
    };
    if (nodes < 2) {
        fail("nodes", "need at least 2 nodes");
    }
    if (flows * 2 > nodes) {
        fail("flows", "flows must not exceed nodes/2");
    }
    if (areaWidthM <= 0.0 || areaHeightM <= 0.0) {
        fail("area_width_m", "area dimensions must be positive");
    }
    if (speedMps < 0.0) {
        fail("speed_mps", "speed must be nonnegative");
    }
    if (pauseS < 0.0) {
        fail("pause_s", "pause must be nonnegative");
    }
    if (trafficPps <= 0.0) {
        fail("traffic_pps", "traffic rate must be positive");
    }
    if (packetBytes <= 0) {
        fail("packet_bytes", "packet size must be positive");
    }
    if (durationS <= 0.0) {
        fail("duration_s", "duration must be positive");
    }
    if (bandwidthBps <= 0) {
        fail("bandwidth_bps", "bandwidth must be positive");
    }
    if (rangeM <= 0.0) {
        fail("range_m", "range must be positive");
    }
    if (linkScanDtS <= 0.0) {
        fail("link_scan_dt_s", "link scan interval must be positive");
    }
}

std::string Scenario::id() const {
    std::ostringstream os;
    os << protocolName(protocol) << "-n" << nodes << "-v" << fmtCompact(speedMps) << "-p"
       << fmtCompact(pauseS) << "-t" << fmtCompact(trafficPps) << "-s" << seed;
    return os.str();
}

Scenario parseScenarioText(const std::string& text) {
    Scenario sc;
    for (const KeyValueLine& kv : parseKeyValueLines(text)) {
        applyScenarioKey(sc, kv);
    }
    sc.validate();
    return sc;
}

Scenario loadScenarioFile(const std::string& path) {
    return parseScenarioText(readTextFile(path));
}

} // namespace manet
