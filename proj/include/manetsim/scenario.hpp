#ifndef MANETSIM_SCENARIO_HPP
#define MANETSIM_SCENARIO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "manetsim/routing_common.hpp"

namespace manet {

/// Full experiment description; one Scenario (with its seed) reproduces one
/// run exactly.
struct Scenario {
    Protocol protocol = Protocol::Aodv;
    std::uint32_t nodes = 50;
    double areaWidthM = 1000.0;
    double areaHeightM = 1000.0;
    double speedMps = 2.0;
    double pauseS = 0.0;
    double trafficPps = 2.0;
    std::uint32_t flows = 10;
    int packetBytes = 512;
    double durationS = 300.0;
    std::uint64_t seed = 1;
    std::int64_t bandwidthBps = 2'000'000;

    // Engine knobs (defaults overridable from config files)
    double rangeM = 250.0;
    double linkScanDtS = 0.1;

    void validate() const; // throws ConfigError on nonsense values
    std::string id() const;
};

struct ConfigError : std::runtime_error {
    int line;
    std::string field;
    ConfigError(int lineNo, std::string fieldName, const std::string& msg);
};

/// One `key = value` statement with its source line for diagnostics.
struct KeyValueLine {
    int line = 0;
    std::string key;
    std::string value;
};

/// Tokenizes the shared config format: one `key = value` per line, `#`
/// starts a comment, blank lines ignored. Value syntax is up to the caller.
std::vector<KeyValueLine> parseKeyValueLines(const std::string& text);

std::string readTextFile(const std::string& path); // throws ConfigError on I/O failure

/// Parses the line-oriented `key = value` scenario format. Keys must match
/// Scenario field names; unknown keys are errors.
Scenario parseScenarioText(const std::string& text);
Scenario loadScenarioFile(const std::string& path);

/// Applies one key/value pair onto a Scenario; shared with the sweep parser.
void applyScenarioKey(Scenario& sc, const KeyValueLine& kv);

} // namespace manet

#endif
