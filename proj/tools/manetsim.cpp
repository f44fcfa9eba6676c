// Command-line front end: single runs, experiment matrices, the standalone
// analytic cost sweep, and trend verdicts over a runs CSV.

#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "manetsim/analytics.hpp"
#include "manetsim/harness.hpp"
#include "manetsim/scenario.hpp"

namespace {

double parseReal(const manet::KeyValueLine& kv) {
    double v = 0.0;
    const auto res = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), v);
    if (res.ec != std::errc() || res.ptr != kv.value.data() + kv.value.size()) {
        throw manet::ConfigError(kv.line, kv.key, "not a number: '" + kv.value + "'");
    }
    return v;
}

std::int64_t parseInt(const manet::KeyValueLine& kv) {
    std::int64_t v = 0;
    const auto res = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), v);
    if (res.ec != std::errc() || res.ptr != kv.value.data() + kv.value.size()) {
        throw manet::ConfigError(kv.line, kv.key, "not an integer: '" + kv.value + "'");
    }
    return v;
}

std::vector<std::int64_t> parseIntList(const manet::KeyValueLine& kv) {
    std::vector<std::int64_t> out;
    std::string cur;
    std::istringstream is(kv.value);
    while (std::getline(is, cur, ',')) {
        const auto b = cur.find_first_not_of(" \t");
        const auto e = cur.find_last_not_of(" \t");
        if (b == std::string::npos) {
            throw manet::ConfigError(kv.line, kv.key, "empty value in list");
        }
        out.push_back(parseInt(manet::KeyValueLine{kv.line, kv.key, cur.substr(b, e - b + 1)}));
    }
    if (out.empty()) {
        throw manet::ConfigError(kv.line, kv.key, "empty list");
    }
    return out;
}

struct AnalyticInputs {
    manet::analytics::CostParams params;
    manet::ErsSchedule ers;
};

AnalyticInputs loadAnalyticParams(const std::string& path) {
    AnalyticInputs in;
    for (const manet::KeyValueLine& kv : manet::parseKeyValueLines(manet::readTextFile(path))) {
        if (kv.key == "d_avg") {
            in.params.dAvg = parseReal(kv);
        } else if (kv.key == "rings") {
            in.params.rings = parseIntList(kv);
        } else if (kv.key == "n_llr") {
            in.params.nLlr = parseInt(kv);
        } else if (kv.key == "n_rerr") {
            in.params.nRerr = parseInt(kv);
        } else if (kv.key == "n_ps") {
            in.params.nPs = parseInt(kv);
        } else if (kv.key == "n_rn") {
            in.params.nRn = parseReal(kv);
        } else if (kv.key == "tau_route_in_use_s") {
            in.params.tauRouteInUseS = parseReal(kv);
        } else if (kv.key == "tau_hello_interval_s") {
            in.params.tauHelloIntervalS = parseReal(kv);
        } else if (kv.key == "lb_indicator") {
            in.params.lbIndicator = static_cast<int>(parseInt(kv));
        } else if (kv.key == "pus_indicator") {
            in.params.pusIndicator = static_cast<int>(parseInt(kv));
        } else if (kv.key == "ttl_start") {
            in.ers.ttlStart = static_cast<int>(parseInt(kv));
        } else if (kv.key == "ttl_increment") {
            in.ers.ttlIncrement = static_cast<int>(parseInt(kv));
        } else if (kv.key == "ttl_threshold") {
            in.ers.ttlThreshold = static_cast<int>(parseInt(kv));
        } else if (kv.key == "net_diameter") {
            in.ers.netDiameter = static_cast<int>(parseInt(kv));
        } else if (kv.key == "max_net_attempts") {
            in.ers.maxNetAttempts = static_cast<int>(parseInt(kv));
        } else if (kv.key == "ring_wait_per_ttl_s") {
            in.ers.ringWaitPerTtlS = parseReal(kv);
        } else {
            throw manet::ConfigError(kv.line, kv.key, "unknown key");
        }
    }
    return in;
}

int cmdSimulate(const std::string& configPath, const std::string& eventLogPath) {
    const manet::Scenario sc = manet::loadScenarioFile(configPath);
    std::unique_ptr<std::ofstream> logStream;
    if (!eventLogPath.empty()) {
        logStream = std::make_unique<std::ofstream>(eventLogPath);
        if (!*logStream) {
            throw manet::ConfigError(0, "event-log", "cannot open '" + eventLogPath + "'");
        }
    }
    const manet::harness::RunResult res =
        manet::harness::runScenario(sc, logStream ? logStream.get() : nullptr);
    std::cout << manet::harness::csvHeader() << '\n'
              << manet::harness::toCsvLine(res.row) << '\n';
    std::cerr << "lp:";
    for (const auto& v : res.lp.violations) {
        std::cerr << ' ' << v.id << '=' << v.count;
    }
    std::cerr << '\n';
    return 0;
}

int cmdMatrix(const std::string& source, int seeds, const std::string& outPath, int jobs) {
    const manet::harness::MatrixSpec spec =
        manet::harness::isPresetName(source) ? manet::harness::preset(source, seeds)
                                             : manet::harness::matrixFromConfigFile(source, seeds);
    const std::vector<manet::harness::RunResult> runs = manet::harness::runMatrix(spec, jobs);

    std::ofstream out(outPath);
    if (!out) {
        throw manet::ConfigError(0, "out", "cannot open '" + outPath + "'");
    }
    manet::harness::writeRunsCsv(out, runs);

    std::string aggPath = outPath;
    const std::string suffix = ".csv";
    if (aggPath.size() > suffix.size() &&
        aggPath.compare(aggPath.size() - suffix.size(), suffix.size(), suffix) == 0) {
        aggPath.resize(aggPath.size() - suffix.size());
    }
    aggPath += ".agg.csv";
    std::ofstream agg(aggPath);
    if (!agg) {
        throw manet::ConfigError(0, "out", "cannot open '" + aggPath + "'");
    }
    std::vector<manet::harness::MetricsRow> rows;
    rows.reserve(runs.size());
    for (const auto& r : runs) {
        rows.push_back(r.row);
    }
    manet::harness::writeAggregateCsv(agg, rows);

    std::cerr << "wrote " << runs.size() << " runs to " << outPath << " (aggregate: " << aggPath
              << ")\n";
    return 0;
}

int cmdAnalytic(const std::string& paramsPath) {
    const AnalyticInputs in = loadAnalyticParams(paramsPath);
    const auto rows = manet::analytics::sweep(in.params, in.ers);
    std::cout << "m,ttl,n_k,ce_ring,ce_rd_cum,wait_s,wait_cum_s,ce_rm_aodv,ce_rm_aodv_ll,"
                 "ce_rm_dsr,ce_rm_dymo\n";
    for (const auto& r : rows) {
        std::cout << r.m << ',' << r.ttl << ',' << r.nK << ',' << r.ceRingCost << ',' << r.ceRdCum
                  << ',' << r.waitS << ',' << r.waitCumS << ',' << r.ceRmAodv << ','
                  << r.ceRmAodvLl << ',' << r.ceRmDsr << ',' << r.ceRmDymo << '\n';
    }
    return 0;
}

int cmdVerdict(const std::string& csvPath, int minPass) {
    std::ifstream in(csvPath);
    if (!in) {
        throw manet::ConfigError(0, "csv", "cannot open '" + csvPath + "'");
    }
    const std::vector<manet::harness::MetricsRow> rows = manet::harness::readRunsCsv(in);
    const manet::harness::VerdictResult verdict = manet::harness::evaluateTrends(rows, minPass);
    int passed = 0;
    for (const auto& c : verdict.claims) {
        std::cout << manet::harness::claimStatusName(c.status) << ' ' << c.name << ": " << c.detail
                  << '\n';
        if (c.status == manet::harness::ClaimStatus::Pass) {
            passed++;
        }
    }
    std::cout << "suite: " << (verdict.suitePass ? "PASS" : "FAIL") << " (" << passed << '/'
              << verdict.claims.size() << " claims hold)\n";
    return verdict.suitePass ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic MANET routing simulator"};
    app.require_subcommand(1);

    std::string simConfig;
    std::string simEventLog;
    CLI::App* simulate = app.add_subcommand("simulate", "run one scenario and print its CSV row");
    simulate->add_option("config", simConfig, "scenario file (key = value lines)")->required();
    simulate->add_option("--event-log", simEventLog, "write the per-event trace to this file");

    std::string matSource;
    std::string matOut;
    int matSeeds = 5;
    int matJobs = 1;
    CLI::App* matrix =
        app.add_subcommand("matrix", "run an experiment matrix and write runs + aggregate CSVs");
    matrix->add_option("source", matSource, "preset name (mobility|scalability|traffic|all) or sweep file")
        ->required();
    matrix->add_option("--seeds", matSeeds, "seeds 1..N per cell")->check(CLI::PositiveNumber);
    matrix->add_option("--out", matOut, "runs CSV path")->required();
    matrix->add_option("--jobs", matJobs, "worker threads")->check(CLI::PositiveNumber);

    std::string anaParams;
    CLI::App* analytic =
        app.add_subcommand("analytic", "evaluate the closed-form cost model sweep");
    analytic->add_option("params", anaParams, "cost parameter file")->required();

    std::string verCsv;
    int verMinPass = 4;
    CLI::App* verdict =
        app.add_subcommand("verdict", "evaluate directional trend claims over a runs CSV");
    verdict->add_option("csv", verCsv, "runs CSV produced by the matrix subcommand")->required();
    verdict->add_option("--min-pass", verMinPass, "claims that must pass")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) {
            return cmdSimulate(simConfig, simEventLog);
        }
        if (matrix->parsed()) {
            return cmdMatrix(matSource, matSeeds, matOut, matJobs);
        }
        if (analytic->parsed()) {
            return cmdAnalytic(anaParams);
        }
        if (verdict->parsed()) {
            return cmdVerdict(verCsv, verMinPass);
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const manet::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
