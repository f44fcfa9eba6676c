#include "manetsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "manetsim/engine.hpp"
#include "manetsim/metrics.hpp"

namespace manet::harness {

namespace {

constexpr const char* kCsvHeader =
    "scenario_id,protocol,nodes,speed_mps,pause_s,traffic_pps,seed,throughput_bps,avg_e2ed_s,"
    "nrl,ctrl_rreq,ctrl_rrep,ctrl_grat_rrep,ctrl_rerr,ctrl_hello,data_sent,data_recv,"
    "data_dropped,link_breaks,repairs_ok,repairs_fail,salvages,no_route_events,"
    "lp_violations_1a,lp_violations_2a,lp_violations_3a";
constexpr int kCsvColumns = 26;

std::string fmtDouble(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fmtOpt(const std::optional<double>& v) {
    return v ? fmtDouble(*v) : std::string();
}

double parseDoubleField(const std::string& s, const char* field) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(0, field, "not a number: '" + s + "'");
    }
    return v;
}

std::uint64_t parseCountField(const std::string& s, const char* field) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(0, field, "not a count: '" + s + "'");
    }
    return v;
}

std::vector<std::string> splitCsv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    return s / static_cast<double>(xs.size());
}

double sampleSd(const std::vector<double>& xs) {
    if (xs.size() < 2) {
        return 0.0;
    }
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) {
        s += (x - m) * (x - m);
    }
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

} // namespace

std::string csvHeader() {
    return kCsvHeader;
}

std::string toCsvLine(const MetricsRow& r) {
    std::ostringstream os;
    os << r.scenarioId << ',' << r.protocol << ',' << r.nodes << ',' << fmtDouble(r.speedMps)
       << ',' << fmtDouble(r.pauseS) << ',' << fmtDouble(r.trafficPps) << ',' << r.seed << ','
       << fmtDouble(r.throughputBps) << ',' << fmtOpt(r.avgE2edS) << ',' << fmtOpt(r.nrl) << ','
       << r.ctrlRreq << ',' << r.ctrlRrep << ',' << r.ctrlGratRrep << ',' << r.ctrlRerr << ','
       << r.ctrlHello << ',' << r.dataSent << ',' << r.dataRecv << ',' << r.dataDropped << ','
       << r.linkBreaks << ',' << r.repairsOk << ',' << r.repairsFail << ',' << r.salvages << ','
       << r.noRouteEvents << ',' << r.lpViolations1a << ',' << r.lpViolations2a << ','
       << r.lpViolations3a;
    return os.str();
}

MetricsRow parseCsvLine(const std::string& line) {
    const std::vector<std::string> f = splitCsv(line);
    if (f.size() != kCsvColumns) {
        throw ConfigError(0, "row",
                          "expected " + std::to_string(kCsvColumns) + " columns, got " +
                              std::to_string(f.size()));
    }
    MetricsRow r;
    r.scenarioId = f[0];
    r.protocol = f[1];
    if (!protocolFromName(r.protocol)) {
        throw ConfigError(0, "protocol", "unknown protocol '" + r.protocol + "'");
    }
    r.nodes = static_cast<std::uint32_t>(parseCountField(f[2], "nodes"));
    r.speedMps = parseDoubleField(f[3], "speed_mps");
    r.pauseS = parseDoubleField(f[4], "pause_s");
    r.trafficPps = parseDoubleField(f[5], "traffic_pps");
    r.seed = parseCountField(f[6], "seed");
    r.throughputBps = parseDoubleField(f[7], "throughput_bps");
    if (!f[8].empty()) {
        r.avgE2edS = parseDoubleField(f[8], "avg_e2ed_s");
    }
    if (!f[9].empty()) {
        r.nrl = parseDoubleField(f[9], "nrl");
    }
    r.ctrlRreq = parseCountField(f[10], "ctrl_rreq");
    r.ctrlRrep = parseCountField(f[11], "ctrl_rrep");
    r.ctrlGratRrep = parseCountField(f[12], "ctrl_grat_rrep");
    r.ctrlRerr = parseCountField(f[13], "ctrl_rerr");
    r.ctrlHello = parseCountField(f[14], "ctrl_hello");
    r.dataSent = parseCountField(f[15], "data_sent");
    r.dataRecv = parseCountField(f[16], "data_recv");
    r.dataDropped = parseCountField(f[17], "data_dropped");
    r.linkBreaks = parseCountField(f[18], "link_breaks");
    r.repairsOk = parseCountField(f[19], "repairs_ok");
    r.repairsFail = parseCountField(f[20], "repairs_fail");
    r.salvages = parseCountField(f[21], "salvages");
    r.noRouteEvents = parseCountField(f[22], "no_route_events");
    r.lpViolations1a = parseCountField(f[23], "lp_violations_1a");
    r.lpViolations2a = parseCountField(f[24], "lp_violations_2a");
    r.lpViolations3a = parseCountField(f[25], "lp_violations_3a");
    return r;
}

std::vector<MetricsRow> readRunsCsv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError(1, "header", "empty input");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kCsvHeader) {
        throw ConfigError(1, "header", "unrecognized runs-CSV header");
    }
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        rows.push_back(parseCsvLine(line));
    }
    return rows;
}

RunResult runScenario(const Scenario& sc, std::ostream* eventLog) {
    RunResult res;
    res.scenario = sc;
    Simulation sim(sc, eventLog);
    sim.run();
    res.stats = sim.stats();
    res.lp = analytics::checkConstraints(res.stats, sc.durationS, analytics::LpParams{},
                                         sc.protocol);

    MetricsRow& r = res.row;
    r.scenarioId = sc.id();
    r.protocol = protocolName(sc.protocol);
    r.nodes = sc.nodes;
    r.speedMps = sc.speedMps;
    r.pauseS = sc.pauseS;
    r.trafficPps = sc.trafficPps;
    r.seed = sc.seed;
    r.throughputBps = metrics::throughput(res.stats, sc.durationS);
    r.avgE2edS = metrics::avgE2ed(res.stats);
    r.nrl = metrics::nrl(res.stats);
    r.ctrlRreq = res.stats.ctrlRreq;
    r.ctrlRrep = res.stats.ctrlRrep;
    r.ctrlGratRrep = res.stats.ctrlGratRrep;
    r.ctrlRerr = res.stats.ctrlRerr;
    r.ctrlHello = res.stats.ctrlHello;
    r.dataSent = res.stats.dataOriginated;
    r.dataRecv = res.stats.dataDelivered;
    r.dataDropped = res.stats.dataDropped;
    r.linkBreaks = res.stats.linkBreaks;
    r.repairsOk = res.stats.repairsSucceeded;
    r.repairsFail = res.stats.repairsFailed;
    r.salvages = res.stats.salvages;
    r.noRouteEvents = res.stats.noRouteEvents;
    r.lpViolations1a = res.lp.violationCount("1.a");
    r.lpViolations2a = res.lp.violationCount("2.a");
    r.lpViolations3a = res.lp.violationCount("3.a");
    return res;
}

namespace {

constexpr Protocol kAllProtocols[] = {Protocol::Aodv, Protocol::AodvLl, Protocol::Dsr,
                                      Protocol::DsrM, Protocol::Dymo};

// desk scale keeps the reference density of 50 nodes per square km
double deskSideM(std::uint32_t nodes) {
    return std::sqrt(static_cast<double>(nodes) / 50.0) * 1000.0;
}

Scenario deskCell(Protocol p, std::uint32_t nodes) {
    Scenario sc;
    sc.protocol = p;
    sc.nodes = nodes;
    sc.areaWidthM = deskSideM(nodes);
    sc.areaHeightM = deskSideM(nodes);
    sc.durationS = 300.0;
    sc.flows = std::min<std::uint32_t>(10, nodes / 2);
    sc.trafficPps = 2.0;
    return sc;
}

void appendMobilityCells(std::vector<Scenario>& out) {
    for (Protocol p : kAllProtocols) {
        for (double speed : {2.0, 30.0}) {
            for (double pause : {0.0, 75.0, 150.0, 300.0}) {
                Scenario sc = deskCell(p, 25);
                sc.speedMps = speed;
                sc.pauseS = pause;
                out.push_back(sc);
            }
        }
    }
}

void appendScalabilityCells(std::vector<Scenario>& out) {
    for (Protocol p : kAllProtocols) {
        for (std::uint32_t nodes : {10u, 25u, 40u}) {
            Scenario sc = deskCell(p, nodes);
            sc.speedMps = 15.0;
            sc.pauseS = 2.0;
            out.push_back(sc);
        }
    }
}

void appendTrafficCells(std::vector<Scenario>& out) {
    for (Protocol p : kAllProtocols) {
        for (double pps : {2.0, 8.0, 32.0}) {
            Scenario sc = deskCell(p, 25);
            sc.speedMps = 2.0;
            sc.pauseS = 0.0;
            sc.trafficPps = pps;
            out.push_back(sc);
        }
    }
}

MatrixSpec expandSeeds(std::vector<Scenario> cells, int seeds) {
    if (seeds < 1) {
        throw ConfigError(0, "seeds", "need at least one seed");
    }
    MatrixSpec spec;
    spec.cells.reserve(cells.size() * static_cast<std::size_t>(seeds));
    for (const Scenario& cell : cells) {
        for (int s = 1; s <= seeds; ++s) {
            Scenario sc = cell;
            sc.seed = static_cast<std::uint64_t>(s);
            sc.validate();
            spec.cells.push_back(sc);
        }
    }
    return spec;
}

} // namespace

bool isPresetName(const std::string& name) {
    return name == "mobility" || name == "scalability" || name == "traffic" || name == "all";
}

MatrixSpec preset(const std::string& name, int seeds) {
    std::vector<Scenario> cells;
    if (name == "mobility") {
        appendMobilityCells(cells);
    } else if (name == "scalability") {
        appendScalabilityCells(cells);
    } else if (name == "traffic") {
        appendTrafficCells(cells);
    } else if (name == "all") {
        appendMobilityCells(cells);
        appendScalabilityCells(cells);
        appendTrafficCells(cells);
    } else {
        throw ConfigError(0, "preset", "unknown preset '" + name + "'");
    }
    return expandSeeds(std::move(cells), seeds);
}

MatrixSpec matrixFromConfigText(const std::string& text, int seeds) {
    std::vector<Scenario> cells;
    cells.push_back(Scenario{});
    for (const KeyValueLine& kv : parseKeyValueLines(text)) {
        if (kv.key == "seed") {
            throw ConfigError(kv.line, kv.key,
                              "seeds are controlled by --seeds, not by sweep files");
        }
        std::vector<std::string> values;
        std::string cur;
        std::istringstream vs(kv.value);
        while (std::getline(vs, cur, ',')) {
            const auto b = cur.find_first_not_of(" \t");
            const auto e = cur.find_last_not_of(" \t");
            if (b == std::string::npos) {
                throw ConfigError(kv.line, kv.key, "empty value in list");
            }
            values.push_back(cur.substr(b, e - b + 1));
        }
        if (values.empty()) {
            throw ConfigError(kv.line, kv.key, "empty value list");
        }
        std::vector<Scenario> expanded;
        expanded.reserve(cells.size() * values.size());
        for (const Scenario& cell : cells) {
            for (const std::string& v : values) {
                Scenario sc = cell;
                applyScenarioKey(sc, KeyValueLine{kv.line, kv.key, v});
                expanded.push_back(sc);
            }
        }
        cells = std::move(expanded);
    }
    return expandSeeds(std::move(cells), seeds);
}

MatrixSpec matrixFromConfigFile(const std::string& path, int seeds) {
    return matrixFromConfigText(readTextFile(path), seeds);
}

std::vector<RunResult> runMatrix(const MatrixSpec& spec, int jobs) {
    std::vector<RunResult> results(spec.cells.size());
    if (spec.cells.empty()) {
        return results;
    }
    const std::size_t workers =
        std::min<std::size_t>(std::max(jobs, 1), spec.cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= spec.cells.size()) {
                return;
            }
            results[i] = runScenario(spec.cells[i]);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return results;
}

void writeRunsCsv(std::ostream& out, const std::vector<RunResult>& runs) {
    out << kCsvHeader << '\n';
    for (const RunResult& r : runs) {
        out << toCsvLine(r.row) << '\n';
    }
}

void writeAggregateCsv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    using Key = std::tuple<std::string, std::uint32_t, double, double, double>;
    struct Acc {
        std::vector<double> thr;
        std::vector<double> e2ed;
        std::vector<double> nrl;
        double recv = 0.0;
        double dropped = 0.0;
        double breaks = 0.0;
        double ctrl = 0.0;
        int n = 0;
    };
    std::map<Key, Acc> groups;
    for (const MetricsRow& r : rows) {
        Acc& a = groups[{r.protocol, r.nodes, r.speedMps, r.pauseS, r.trafficPps}];
        a.thr.push_back(r.throughputBps);
        if (r.avgE2edS) {
            a.e2ed.push_back(*r.avgE2edS);
        }
        if (r.nrl) {
            a.nrl.push_back(*r.nrl);
        }
        a.recv += static_cast<double>(r.dataRecv);
        a.dropped += static_cast<double>(r.dataDropped);
        a.breaks += static_cast<double>(r.linkBreaks);
        a.ctrl += static_cast<double>(r.ctrlRreq + r.ctrlRrep + r.ctrlGratRrep + r.ctrlRerr +
                                      r.ctrlHello);
        a.n++;
    }
    out << "protocol,nodes,speed_mps,pause_s,traffic_pps,runs,throughput_bps_mean,"
           "throughput_bps_sd,avg_e2ed_s_mean,avg_e2ed_s_sd,nrl_mean,nrl_sd,data_recv_mean,"
           "data_dropped_mean,link_breaks_mean,ctrl_total_mean\n";
    for (const auto& [key, a] : groups) {
        const auto& [protocol, nodes, speed, pause, pps] = key;
        out << protocol << ',' << nodes << ',' << fmtDouble(speed) << ',' << fmtDouble(pause)
            << ',' << fmtDouble(pps) << ',' << a.n << ',' << fmtDouble(mean(a.thr)) << ','
            << fmtDouble(sampleSd(a.thr)) << ','
            << (a.e2ed.empty() ? std::string() : fmtDouble(mean(a.e2ed))) << ','
            << (a.e2ed.empty() ? std::string() : fmtDouble(sampleSd(a.e2ed))) << ','
            << (a.nrl.empty() ? std::string() : fmtDouble(mean(a.nrl))) << ','
            << (a.nrl.empty() ? std::string() : fmtDouble(sampleSd(a.nrl))) << ','
            << fmtDouble(a.recv / a.n) << ',' << fmtDouble(a.dropped / a.n) << ','
            << fmtDouble(a.breaks / a.n) << ',' << fmtDouble(a.ctrl / a.n) << '\n';
    }
}

const char* claimStatusName(ClaimStatus s) {
    switch (s) {
    case ClaimStatus::Pass:
        return "PASS";
    case ClaimStatus::Inconclusive:
        return "INCONCLUSIVE";
    case ClaimStatus::Fail:
        return "FAIL";
    case ClaimStatus::Missing:
        return "MISSING";
    }
    return "?";
}

namespace {

struct Sample {
    std::vector<double> xs;
};

using RowFilter = bool (*)(const MetricsRow&);
using RowMetric = std::optional<double> (*)(const MetricsRow&);

std::map<std::string, Sample> collect(const std::vector<MetricsRow>& rows, RowFilter keep,
                                      RowMetric metric) {
    std::map<std::string, Sample> by;
    for (const MetricsRow& r : rows) {
        if (!keep(r)) {
            continue;
        }
        if (const auto v = metric(r)) {
            by[r.protocol].xs.push_back(*v);
        }
    }
    return by;
}

struct PairOutcome {
    ClaimStatus status = ClaimStatus::Missing;
    std::string detail;
};

/// Checks mean(lo) <= mean(hi) with a one-pooled-stddev tolerance band.
PairOutcome comparePair(const std::map<std::string, Sample>& by, const std::string& lo,
                        const std::string& hi) {
    PairOutcome out;
    const auto li = by.find(lo);
    const auto hi_ = by.find(hi);
    if (li == by.end() || hi_ == by.end() || li->second.xs.empty() || hi_->second.xs.empty()) {
        out.detail = lo + " vs " + hi + ": missing data";
        return out;
    }
    const auto& a = li->second.xs;
    const auto& b = hi_->second.xs;
    const double ma = mean(a);
    const double mb = mean(b);
    const double margin = mb - ma;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double pooled = 0.0;
    if (a.size() + b.size() > 2) {
        const double sa = sampleSd(a);
        const double sb = sampleSd(b);
        pooled = std::sqrt(((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / (na + nb - 2.0));
    }
    if (margin >= 0.0) {
        out.status = ClaimStatus::Pass;
    } else if (-margin > pooled) {
        out.status = ClaimStatus::Fail;
    } else {
        out.status = ClaimStatus::Inconclusive;
    }
    std::ostringstream os;
    os << lo << "=" << fmtDouble(ma) << " " << hi << "=" << fmtDouble(mb) << " margin="
       << fmtDouble(margin) << " pooled_sd=" << fmtDouble(pooled);
    out.detail = os.str();
    return out;
}

ClaimResult combine(std::string name, const std::vector<PairOutcome>& parts) {
    ClaimResult res;
    res.name = std::move(name);
    ClaimStatus status = ClaimStatus::Pass;
    for (const PairOutcome& p : parts) {
        if (!res.detail.empty()) {
            res.detail += "; ";
        }
        res.detail += p.detail;
        if (p.status == ClaimStatus::Missing) {
            status = ClaimStatus::Missing;
            break;
        }
        if (p.status == ClaimStatus::Fail) {
            status = ClaimStatus::Fail;
        } else if (p.status == ClaimStatus::Inconclusive && status == ClaimStatus::Pass) {
            status = ClaimStatus::Inconclusive;
        }
    }
    res.status = status;
    return res;
}

std::optional<double> throughputOf(const MetricsRow& r) {
    return r.throughputBps;
}
std::optional<double> nrlOf(const MetricsRow& r) {
    return r.nrl;
}
std::optional<double> e2edOf(const MetricsRow& r) {
    return r.avgE2edS;
}

bool highStressFilter(const MetricsRow& r) {
    return r.speedMps == 30.0 && r.pauseS == 0.0 && r.trafficPps == 2.0;
}
bool highSpeedFilter(const MetricsRow& r) {
    return r.speedMps == 30.0 && r.trafficPps == 2.0;
}
bool lowSpeedFilter(const MetricsRow& r) {
    return r.speedMps == 2.0 && r.trafficPps == 2.0;
}
bool scalabilityFilter(const MetricsRow& r) {
    return r.speedMps == 15.0;
}

} // namespace

VerdictResult evaluateTrends(const std::vector<MetricsRow>& rows, int minPass) {
    VerdictResult verdict;

    {
        const auto by = collect(rows, highStressFilter, throughputOf);
        verdict.claims.push_back(combine("link-layer feedback lifts AODV throughput under fast "
                                         "continuous motion",
                                         {comparePair(by, "aodv", "aodv-ll")}));
    }
    {
        const auto by = collect(rows, highSpeedFilter, nrlOf);
        verdict.claims.push_back(combine("DYMO pays the highest routing load at high speed",
                                         {comparePair(by, "aodv", "dymo"),
                                          comparePair(by, "dsr", "dymo")}));
    }
    {
        const auto by = collect(rows, lowSpeedFilter, nrlOf);
        verdict.claims.push_back(combine("DSR's caches keep routing load lowest at walking speed",
                                         {comparePair(by, "dsr", "aodv"),
                                          comparePair(by, "dsr", "dymo")}));
    }
    {
        const auto by = collect(rows, highSpeedFilter, nrlOf);
        verdict.claims.push_back(combine("the small cache trims DSR routing load at high speed",
                                         {comparePair(by, "dsr-m", "dsr")}));
    }
    {
        const auto by = collect(rows, scalabilityFilter, e2edOf);
        verdict.claims.push_back(combine("AODV delivers with the largest delay in the scaling runs",
                                         {comparePair(by, "dsr", "aodv"),
                                          comparePair(by, "dymo", "aodv")}));
    }

    int passed = 0;
    bool anyFail = false;
    bool anyMissing = false;
    for (const ClaimResult& c : verdict.claims) {
        if (c.status == ClaimStatus::Pass) {
            passed++;
        } else if (c.status == ClaimStatus::Fail) {
            anyFail = true;
        } else if (c.status == ClaimStatus::Missing) {
            anyMissing = true;
        }
    }
    // missing evidence may not silently count as success
    verdict.suitePass = passed >= minPass && !anyFail && !anyMissing;
    return verdict;
}

} // namespace manet::harness
