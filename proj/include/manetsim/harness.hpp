#ifndef MANETSIM_HARNESS_HPP
#define MANETSIM_HARNESS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "manetsim/analytics.hpp"
#include "manetsim/scenario.hpp"
#include "manetsim/trace_stats.hpp"

namespace manet::harness {

/// One CSV row; the schema is fixed (see csvHeader()).
struct MetricsRow {
    std::string scenarioId;
    std::string protocol;
    std::uint32_t nodes = 0;
    double speedMps = 0.0;
    double pauseS = 0.0;
    double trafficPps = 0.0;
    std::uint64_t seed = 0;
    double throughputBps = 0.0;
    std::optional<double> avgE2edS;
    std::optional<double> nrl;
    std::uint64_t ctrlRreq = 0;
    std::uint64_t ctrlRrep = 0;
    std::uint64_t ctrlGratRrep = 0;
    std::uint64_t ctrlRerr = 0;
    std::uint64_t ctrlHello = 0;
    std::uint64_t dataSent = 0;
    std::uint64_t dataRecv = 0;
    std::uint64_t dataDropped = 0;
    std::uint64_t linkBreaks = 0;
    std::uint64_t repairsOk = 0;
    std::uint64_t repairsFail = 0;
    std::uint64_t salvages = 0;
    std::uint64_t noRouteEvents = 0;
    std::uint64_t lpViolations1a = 0;
    std::uint64_t lpViolations2a = 0;
    std::uint64_t lpViolations3a = 0;
};

std::string csvHeader();
std::string toCsvLine(const MetricsRow& row);
MetricsRow parseCsvLine(const std::string& line); // throws ConfigError on malformed rows
std::vector<MetricsRow> readRunsCsv(std::istream& in);

struct RunResult {
    Scenario scenario;
    TraceStats stats;
    analytics::LpReport lp;
    MetricsRow row;
};

/// Runs one scenario deterministically and assembles its row + LP report.
RunResult runScenario(const Scenario& sc, std::ostream* eventLog = nullptr);

/// Expanded experiment matrix: one Scenario per (cell, seed).
struct MatrixSpec {
    std::vector<Scenario> cells;
};

/// Desk-scale presets mirroring the experiment axes: "mobility",
/// "scalability", "traffic" or "all". Node counts are shrunk but node
/// density (nodes per km^2) and protocol parameters are preserved.
MatrixSpec preset(const std::string& name, int seeds);
bool isPresetName(const std::string& name);

/// Sweep description file: scenario keys with comma-separated value lists,
/// expanded as a cross product. Seeds 1..N are appended as an extra axis.
MatrixSpec matrixFromConfigText(const std::string& text, int seeds);
MatrixSpec matrixFromConfigFile(const std::string& path, int seeds);

/// Runs all cells (optionally on `jobs` threads; results are ordered by cell
/// index regardless, so output is identical for any job count).
std::vector<RunResult> runMatrix(const MatrixSpec& spec, int jobs = 1);

void writeRunsCsv(std::ostream& out, const std::vector<RunResult>& runs);

/// Per-cell mean/stddev over seeds, keyed by
/// (protocol, nodes, speed, pause, traffic).
void writeAggregateCsv(std::ostream& out, const std::vector<MetricsRow>& rows);

enum class ClaimStatus { Pass, Inconclusive, Fail, Missing };

const char* claimStatusName(ClaimStatus s);

struct ClaimResult {
    std::string name;
    std::string detail;
    ClaimStatus status = ClaimStatus::Missing;
};

/// Directional trend verdicts over ensemble means. A claim passes when the
/// inequality holds on means, is inconclusive when it fails within one
/// pooled stddev, and fails only when inverted by more than one pooled
/// stddev. The suite passes when at least `minPass` claims pass, none
/// fails, and no claim is missing its rows.
struct VerdictResult {
    std::vector<ClaimResult> claims;
    bool suitePass = false;
};

VerdictResult evaluateTrends(const std::vector<MetricsRow>& rows, int minPass = 4);

} // namespace manet::harness

#endif
