// nft_audit: ingest NFT sales, compute market statistics, and audit
// collections for wash trading. See README.md for the full artifact layout.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nftaudit/corpus.hpp"
#include "nftaudit/csv.hpp"
#include "nftaudit/evaluate.hpp"
#include "nftaudit/ingest.hpp"
#include "nftaudit/market_stats.hpp"
#include "nftaudit/synth.hpp"
#include "nftaudit/wash_audit.hpp"

namespace fs = std::filesystem;

namespace {

using namespace nftaudit;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Everything a subcommand can resolve from defaults, the config file, the
// environment, and flags — in increasing order of precedence.
struct RunConfig {
    std::string out_dir = "out";
    int k = 20;
    double threshold = 1.5;
    int jobs = 1;
    std::uint64_t seed = 1;
    bool verbose = false;

    std::string base_url = "http://localhost:8080";
    int page_size = 1000;
    double rate_limit_per_sec = 0.0;
    int max_retries = 5;
    std::int64_t window_stride_s = 86400;
    std::string api_key;  // env NFT_AUDIT_API_KEY only; never a flag
};

std::optional<std::string> config_path_from_argv(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return std::nullopt;
}

void apply_config_file(const std::string& path, RunConfig& rc) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw UsageError("config file is not a JSON object: " + path);
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "base_url") rc.base_url = value.get<std::string>();
            else if (key == "page_size") rc.page_size = value.get<int>();
            else if (key == "rate_limit_per_sec") rc.rate_limit_per_sec = value.get<double>();
            else if (key == "max_retries") rc.max_retries = value.get<int>();
            else if (key == "window_stride_s") rc.window_stride_s = value.get<std::int64_t>();
            else if (key == "k") rc.k = value.get<int>();
            else if (key == "threshold" || key == "lof_threshold") rc.threshold = value.get<double>();
            else if (key == "jobs") rc.jobs = value.get<int>();
            else if (key == "seed") rc.seed = value.get<std::uint64_t>();
            else if (key == "out_dir") rc.out_dir = value.get<std::string>();
            else throw UsageError("unknown config key '" + key + "' in " + path);
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("bad value in config file " + path + ": " + e.what());
    }
}

void validate_run_config(const RunConfig& rc) {
    if (rc.k < 1) throw UsageError("k must be >= 1");
    if (rc.threshold <= 0.0) throw UsageError("threshold must be > 0");
    if (rc.jobs < 1) throw UsageError("jobs must be >= 1");
    if (rc.page_size < 1) throw UsageError("page_size must be >= 1");
    if (rc.max_retries < 0) throw UsageError("max_retries must be >= 0");
    if (rc.rate_limit_per_sec < 0.0) throw UsageError("rate_limit_per_sec must be >= 0");
    if (rc.window_stride_s < 1) throw UsageError("window_stride_s must be >= 1");
}

void print_resolved(const RunConfig& rc) {
    std::cerr << "config: out_dir=" << rc.out_dir << " k=" << rc.k
              << " threshold=" << rc.threshold << " jobs=" << rc.jobs << " seed=" << rc.seed
              << " base_url=" << rc.base_url << " page_size=" << rc.page_size
              << " rate_limit_per_sec=" << rc.rate_limit_per_sec
              << " max_retries=" << rc.max_retries << " window_stride_s=" << rc.window_stride_s
              << " api_key=" << (rc.api_key.empty() ? "unset" : "set") << '\n';
}

UnixSeconds parse_time_flag(const std::string& value, const char* flag) {
    auto ts = parse_iso8601_utc(value);
    if (!ts)
        throw UsageError(std::string(flag) + " must be an ISO-8601 UTC timestamp "
                                             "(YYYY-MM-DDTHH:MM:SSZ), got '" + value + "'");
    return *ts;
}

fs::path ensure_out_dir(const RunConfig& rc) {
    fs::path dir(rc.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_header_only(const fs::path& path, const char* header) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw CorpusError("cannot open " + path.string() + " for writing");
    out << header << '\n';
}

TradeSuspicionRule rule_from_string(const std::string& rule) {
    return rule == "both" ? TradeSuspicionRule::kBoth : TradeSuspicionRule::kEither;
}

int cmd_ingest(const RunConfig& rc, const std::string& window_start,
               const std::string& window_end, const std::vector<std::string>& collections) {
    QueryWindow window;
    window.start_time = parse_time_flag(window_start, "--window-start");
    window.end_time = parse_time_flag(window_end, "--window-end");
    window.page_size = rc.page_size;
    if (auto reason = validate_window(window)) throw UsageError(*reason);

    IngestConfig ic;
    ic.base_url = rc.base_url;
    ic.page_size = rc.page_size;
    ic.rate_limit_per_sec = rc.rate_limit_per_sec;
    ic.max_retries = rc.max_retries;
    ic.window_stride_s = rc.window_stride_s;
    ic.jobs = rc.jobs;
    ic.api_key = rc.api_key;

    IngestResult result = ingest_api(ic, window, collections);

    const fs::path out = ensure_out_dir(rc);
    Corpus corpus = Corpus::from_records(std::move(result.records));
    write_corpus(corpus, out / "sales.jsonl");

    nlohmann::json stats{{"accepted", result.stats.accepted},
                         {"rejected", result.stats.rejected},
                         {"requests", result.stats.requests},
                         {"retries", result.stats.retries}};
    std::ofstream stats_out(out / "ingest_stats.json", std::ios::trunc);
    stats_out << stats.dump(2) << '\n';

    std::printf("ingested %lld sales (%lld rejected, %lld requests) -> %s\n",
                static_cast<long long>(result.stats.accepted),
                static_cast<long long>(result.stats.rejected_total()),
                static_cast<long long>(result.stats.requests), out.string().c_str());
    return 0;
}

int cmd_stats(const RunConfig& rc, const std::string& corpus_path,
              const std::string& holders_path, const std::string& lorenz_side,
              const std::string& lorenz_weight) {
    const Corpus corpus = holders_path.empty()
                              ? load_corpus(corpus_path)
                              : load_corpus(corpus_path, holders_path);
    const fs::path out = ensure_out_dir(rc);

    write_quarterly_csv(quarterly_volume(corpus), out / "quarterly.csv");
    write_timeline_csv(timeline(corpus), out / "timeline.csv");

    if (corpus.records().empty()) {
        write_lorenz_csv(LorenzCurve{}, out / "lorenz.csv");
    } else {
        const MarketSide side =
            lorenz_side == "seller" ? MarketSide::kSeller : MarketSide::kBuyer;
        const LorenzWeight weight =
            lorenz_weight == "volume" ? LorenzWeight::kUsdVolume : LorenzWeight::kTradeCount;
        write_lorenz_csv(lorenz(corpus, side, weight), out / "lorenz.csv");
    }

    if (corpus.holders().empty()) {
        write_header_only(out / "concentration.csv",
                          "interval,pct_of_collections,avg_nft_ownership");
    } else {
        write_concentration_csv(holder_concentration(corpus.holders()),
                                out / "concentration.csv");
    }

    std::printf("stats over %zu sales, %zu collections -> %s\n", corpus.records().size(),
                corpus.collection_ids().size(), out.string().c_str());
    return 0;
}

AuditConfig audit_config(const RunConfig& rc, const std::string& rule) {
    AuditConfig ac;
    ac.k = rc.k;
    ac.lof_threshold = rc.threshold;
    ac.rule = rule_from_string(rule);
    return ac;
}

int cmd_audit(const RunConfig& rc, const std::string& corpus_path, const std::string& rule) {
    const Corpus corpus = load_corpus(corpus_path);
    const AuditConfig ac = audit_config(rc, rule);
    const AuditOutcome outcome = audit_corpus(corpus, ac, rc.jobs);

    const fs::path out = ensure_out_dir(rc);
    write_audit_report_csv(outcome.reports, out / "audit_report.csv");
    if (outcome.reports.empty()) {
        write_header_only(out / "wtr_histogram.csv", "bucket,collections,share");
        write_header_only(out / "marketplace_shares.csv", "marketplace,wash_volume_usd,share");
    } else {
        const AuditAggregate aggregate = aggregate_audit(outcome.reports);
        write_wtr_histogram_csv(aggregate, out / "wtr_histogram.csv");
        write_marketplace_shares_csv(aggregate, out / "marketplace_shares.csv");
    }
    write_collection_details(outcome, ac, out / "details");

    std::printf("audited %zu collections (%zu skipped) -> %s\n", outcome.reports.size(),
                outcome.skipped.size(), out.string().c_str());
    return 0;
}

int cmd_simulate(const RunConfig& rc, const std::string& scenario_path, bool seed_given) {
    ScenarioConfig scenario;
    if (!scenario_path.empty()) scenario = scenario_from_json_file(scenario_path);
    if (seed_given || scenario_path.empty()) scenario.seed = rc.seed;

    const LabeledCorpus labeled = generate(scenario);
    const fs::path out = ensure_out_dir(rc);
    write_corpus(labeled.corpus, out / "sales.jsonl");
    write_ground_truth(labeled, out / "ground_truth.json");
    write_scenario_json(scenario, out / "scenario.json");

    std::printf("simulated %zu sales (%zu wash addresses, %zu wash trades) -> %s\n",
                labeled.corpus.records().size(), labeled.wash_addresses.size(),
                labeled.wash_tx_ids.size(), out.string().c_str());
    return 0;
}

int cmd_evaluate(const RunConfig& rc, const std::string& corpus_path,
                 const std::string& truth_path, const std::string& rule) {
    const Corpus corpus = load_corpus(corpus_path);
    const GroundTruth truth = load_ground_truth(truth_path);
    const AuditConfig ac = audit_config(rc, rule);
    const AuditOutcome outcome = audit_corpus(corpus, ac, rc.jobs);
    const EvalMetrics metrics = evaluate(corpus, truth, outcome);

    const fs::path out = ensure_out_dir(rc);
    write_metrics_json(metrics, out / "metrics.json");

    std::printf("address precision=%.4f recall=%.4f f1=%.4f\n", metrics.address.precision,
                metrics.address.recall, metrics.address.f1);
    std::printf("trade   precision=%.4f recall=%.4f f1=%.4f\n", metrics.trade.precision,
                metrics.trade.recall, metrics.trade.f1);
    return 0;
}

nlohmann::json csv_as_json(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    nlohmann::json out{{"header", nlohmann::json::array()}, {"rows", nlohmann::json::array()}};
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto& target = first ? out["header"] : out["rows"].emplace_back();
        target = csv_split(line);
        first = false;
    }
    return out;
}

int cmd_report(const RunConfig& rc, const std::string& in_dir) {
    const fs::path in(in_dir);
    if (!fs::is_directory(in)) throw UsageError("--in-dir is not a directory: " + in_dir);

    static const char* kCsvArtifacts[] = {
        "quarterly.csv",      "timeline.csv",       "lorenz.csv",
        "concentration.csv",  "audit_report.csv",   "wtr_histogram.csv",
        "marketplace_shares.csv",
    };
    static const char* kJsonArtifacts[] = {"ingest_stats.json", "metrics.json",
                                           "ground_truth.json", "scenario.json"};

    nlohmann::json summary;
    summary["artifacts"] = nlohmann::json::array();
    for (const char* name : kCsvArtifacts) {
        if (!fs::exists(in / name)) continue;
        summary["artifacts"].push_back(name);
        summary["csv"][fs::path(name).stem().string()] = csv_as_json(in / name);
    }
    for (const char* name : kJsonArtifacts) {
        if (!fs::exists(in / name)) continue;
        std::ifstream f(in / name);
        nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
        if (j.is_discarded()) throw CorpusError(std::string("malformed JSON artifact: ") + name);
        summary["artifacts"].push_back(name);
        summary["json"][fs::path(name).stem().string()] = std::move(j);
    }
    std::size_t detail_files = 0;
    if (fs::is_directory(in / "details"))
        for (const auto& entry : fs::directory_iterator(in / "details"))
            if (entry.is_regular_file()) ++detail_files;
    summary["details_files"] = detail_files;

    const fs::path out = ensure_out_dir(rc);
    std::ofstream f(out / "summary.json", std::ios::trunc);
    if (!f) throw CorpusError("cannot open " + (out / "summary.json").string() + " for writing");
    f << summary.dump(2) << '\n';

    std::printf("merged %zu artifacts -> %s\n", summary["artifacts"].size(),
                (out / "summary.json").string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig rc;
    try {
        if (auto cfg = config_path_from_argv(argc, argv)) apply_config_file(*cfg, rc);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }
    if (const char* key = std::getenv("NFT_AUDIT_API_KEY")) rc.api_key = key;

    CLI::App app{"NFT sale ingestion, market statistics, and wash-trading audit"};
    app.require_subcommand(1);
    std::string config_flag;
    app.add_option("--config", config_flag, "JSON config file (flags take precedence)");
    app.add_flag("--verbose", rc.verbose, "print the resolved configuration to stderr");

    auto add_common = [&](CLI::App* sub) {
        sub->fallthrough();  // let --config / --verbose appear after the subcommand
        sub->add_option("--out-dir", rc.out_dir, "output directory");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "fetch sales from the API into a corpus");
    std::string window_start, window_end;
    std::vector<std::string> collections;
    ingest->add_option("--window-start", window_start, "ISO-8601 UTC, inclusive")->required();
    ingest->add_option("--window-end", window_end, "ISO-8601 UTC, exclusive")->required();
    ingest->add_option("--base-url", rc.base_url, "sales API endpoint");
    ingest->add_option("--page-size", rc.page_size, "records per page");
    ingest->add_option("--rate-limit", rc.rate_limit_per_sec, "requests/s, 0 = uncapped");
    ingest->add_option("--max-retries", rc.max_retries, "retries per request");
    ingest->add_option("--stride", rc.window_stride_s, "sub-window size, seconds");
    ingest->add_option("--jobs", rc.jobs, "concurrent sub-window fetches");
    ingest->add_option("--collections", collections, "collection-id filter")->delimiter(',');
    add_common(ingest);

    CLI::App* stats = app.add_subcommand("stats", "market statistics CSVs from a corpus");
    std::string stats_corpus, stats_holders, lorenz_side = "buyer", lorenz_weight = "count";
    stats->add_option("--corpus", stats_corpus, "sales JSONL")->required();
    stats->add_option("--holders", stats_holders, "holder snapshot JSONL");
    stats->add_option("--lorenz-side", lorenz_side, "buyer or seller")
        ->check(CLI::IsMember({"buyer", "seller"}));
    stats->add_option("--lorenz-weight", lorenz_weight, "count or volume")
        ->check(CLI::IsMember({"count", "volume"}));
    add_common(stats);

    CLI::App* audit = app.add_subcommand("audit", "per-collection wash-trading audit");
    std::string audit_corpus_path, audit_rule = "either";
    audit->add_option("--corpus", audit_corpus_path, "sales JSONL")->required();
    audit->add_option("--k", rc.k, "LOF neighborhood size");
    audit->add_option("--threshold", rc.threshold, "LOF flagging threshold");
    audit->add_option("--jobs", rc.jobs, "worker threads");
    audit->add_option("--rule", audit_rule, "either or both")
        ->check(CLI::IsMember({"either", "both"}));
    add_common(audit);

    CLI::App* simulate = app.add_subcommand("simulate", "generate a labeled synthetic corpus");
    std::string scenario_path;
    simulate->add_option("--scenario", scenario_path, "scenario JSON (defaults when omitted)");
    CLI::Option* seed_opt = simulate->add_option("--seed", rc.seed, "generator seed");
    add_common(simulate);

    CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "score an audit vs ground truth");
    std::string eval_corpus, eval_truth, eval_rule = "either";
    evaluate_cmd->add_option("--corpus", eval_corpus, "sales JSONL")->required();
    evaluate_cmd->add_option("--truth", eval_truth, "ground-truth JSON")->required();
    evaluate_cmd->add_option("--k", rc.k, "LOF neighborhood size");
    evaluate_cmd->add_option("--threshold", rc.threshold, "LOF flagging threshold");
    evaluate_cmd->add_option("--jobs", rc.jobs, "worker threads");
    evaluate_cmd->add_option("--rule", eval_rule, "either or both")
        ->check(CLI::IsMember({"either", "both"}));
    add_common(evaluate_cmd);

    CLI::App* report = app.add_subcommand("report", "merge artifacts into one summary JSON");
    std::string report_in;
    report->add_option("--in-dir", report_in, "directory with emitted artifacts")->required();
    add_common(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help exits clean, bad usage exits 2
    }

    try {
        validate_run_config(rc);
        if (rc.verbose) print_resolved(rc);

        if (app.got_subcommand(ingest))
            return cmd_ingest(rc, window_start, window_end, collections);
        if (app.got_subcommand(stats))
            return cmd_stats(rc, stats_corpus, stats_holders, lorenz_side, lorenz_weight);
        if (app.got_subcommand(audit)) return cmd_audit(rc, audit_corpus_path, audit_rule);
        if (app.got_subcommand(simulate))
            return cmd_simulate(rc, scenario_path, seed_opt->count() > 0);
        if (app.got_subcommand(evaluate_cmd)) return cmd_evaluate(rc, eval_corpus, eval_truth, eval_rule);
        if (app.got_subcommand(report)) return cmd_report(rc, report_in);
        std::cerr << "usage error: no subcommand\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const IngestError& e) {
        std::cerr << "ingest error: " << e.what() << '\n';
        return 1;
    } catch (const SynthError& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return 1;
    } catch (const CorpusError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
