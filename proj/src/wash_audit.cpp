#include "nftaudit/wash_audit.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "nftaudit/csv.hpp"

namespace nftaudit {

FlagResult flag_suspicious(const FeatureMatrix& features, const AuditConfig& config) {
    FlagResult result;
    const auto n = static_cast<int>(features.addresses.size());
    if (n < 2) throw CorpusError("flag_suspicious needs at least 2 points");

    result.k_used = config.k;
    if (n <= config.k) {
        result.k_used = n - 1;
        result.k_lowered = true;
    }

    const auto scores = lof::lof_scores<double>(features.standardized, result.k_used, config.rd);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].lof > config.lof_threshold)
            result.flagged.push_back({features.addresses[i], scores[i].lof});
    }
    std::sort(result.flagged.begin(), result.flagged.end(),
              [](const FlaggedAddress& a, const FlaggedAddress& b) {
                  if (a.lof != b.lof) return a.lof > b.lof;
                  return a.address < b.address;
              });
    return result;
}

WashReport wash_report(const Corpus& corpus, const std::string& collection_id,
                       const FlagResult& flags, TradeSuspicionRule rule) {
    WashReport report;
    report.collection_id = collection_id;
    report.k_used = flags.k_used;
    report.k_lowered = flags.k_lowered;
    report.suspicious_addresses = flags.flagged;

    std::set<std::string> flagged_set;
    for (const auto& f : flags.flagged) flagged_set.insert(f.address);

    std::set<std::string> tokens_traded;
    std::set<std::string> wash_tokens;
    for (std::size_t pos : corpus.collection_records(collection_id)) {
        const SaleRecord& r = corpus.records()[pos];
        tokens_traded.insert(r.token_id);
        report.total_volume_usd_cents += r.price_usd_cents;

        const bool buyer_hit = flagged_set.count(r.buyer) > 0;
        const bool seller_hit = flagged_set.count(r.seller) > 0;
        const bool suspicious =
            rule == TradeSuspicionRule::kEither ? (buyer_hit || seller_hit)
                                                : (buyer_hit && seller_hit);
        if (suspicious) {
            report.suspicious_trades.push_back(r.tx_id);
            report.wash_volume_usd_cents += r.price_usd_cents;
            report.per_marketplace_wash[r.marketplace] += r.price_usd_cents;
            wash_tokens.insert(r.token_id);
        }
    }

    report.tokens_traded = static_cast<std::int64_t>(tokens_traded.size());
    report.wash_tokens = static_cast<std::int64_t>(wash_tokens.size());
    report.wtr_tokens = report.tokens_traded == 0
                            ? 0.0
                            : static_cast<double>(report.wash_tokens) /
                                  static_cast<double>(report.tokens_traded);
    report.wtr_volume = report.total_volume_usd_cents == 0
                            ? 0.0
                            : static_cast<double>(report.wash_volume_usd_cents) /
                                  static_cast<double>(report.total_volume_usd_cents);
    return report;
}

namespace {

struct CollectionOutcome {
    bool skipped = false;
    WashReport report;
    AuditSkip skip;
};

CollectionOutcome audit_one(const Corpus& corpus, const std::string& collection_id,
                            const AuditConfig& config) {
    CollectionOutcome outcome;
    const TradeGraph graph = TradeGraph::build(corpus, collection_id);
    const auto n = static_cast<int>(graph.node_count());
    if (n < config.min_addresses) {
        outcome.skipped = true;
        outcome.skip = {collection_id, "too few addresses (" + std::to_string(n) + " < " +
                                           std::to_string(config.min_addresses) + ")"};
        return outcome;
    }
    const auto metrics = node_metrics(graph);
    const FeatureMatrix features = extract_features(corpus, collection_id, metrics);
    const FlagResult flags = flag_suspicious(features, config);
    outcome.report = wash_report(corpus, collection_id, flags, config.rule);
    return outcome;
}

}  // namespace

AuditOutcome audit_corpus(const Corpus& corpus, const AuditConfig& config, int jobs) {
    const auto& ids = corpus.collection_ids();
    std::vector<CollectionOutcome> outcomes(ids.size());

    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(ids.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < ids.size(); ++i)
            outcomes[i] = audit_one(corpus, ids[i], config);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= ids.size()) return;
                    outcomes[i] = audit_one(corpus, ids[i], config);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    AuditOutcome result;
    for (auto& o : outcomes) {
        if (o.skipped)
            result.skipped.push_back(std::move(o.skip));
        else
            result.reports.push_back(std::move(o.report));
    }
    return result;
}

AuditAggregate aggregate_audit(const std::vector<WashReport>& reports) {
    if (reports.empty()) throw CorpusError("aggregate_audit: no reports");

    AuditAggregate agg;
    std::map<std::string, UsdCents> wash_by_marketplace;
    UsdCents total_wash = 0;
    for (const WashReport& r : reports) {
        const double w = r.wtr_tokens;
        const int bucket = w < 0.25 ? 0 : w < 0.5 ? 1 : w < 0.75 ? 2 : 3;
        ++agg.histogram.counts[bucket];
        for (const auto& [mkt, cents] : r.per_marketplace_wash) {
            wash_by_marketplace[mkt] += cents;
            total_wash += cents;
        }
    }
    const double n = static_cast<double>(reports.size());
    for (int b = 0; b < 4; ++b)
        agg.histogram.share[b] = static_cast<double>(agg.histogram.counts[b]) / n;

    for (const auto& [mkt, cents] : wash_by_marketplace) {
        MarketplaceShare share;
        share.marketplace = mkt;
        share.wash_volume_usd_cents = cents;
        share.share = total_wash == 0
                          ? 0.0
                          : static_cast<double>(cents) / static_cast<double>(total_wash);
        agg.marketplace_shares.push_back(std::move(share));
    }
    return agg;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw CorpusError("cannot open " + path.string() + " for writing");
    return out;
}

std::string fmt_ratio(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

void write_audit_report_csv(const std::vector<WashReport>& reports,
                            const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "collection_id,tokens_traded,wash_tokens,wtr_tokens,wtr_volume,wash_volume_usd\n";
    for (const WashReport& r : reports) {
        out << csv_escape(r.collection_id) << ',' << r.tokens_traded << ',' << r.wash_tokens
            << ',' << fmt_ratio(r.wtr_tokens) << ',' << fmt_ratio(r.wtr_volume) << ','
            << format_usd(r.wash_volume_usd_cents) << '\n';
    }
}

void write_marketplace_shares_csv(const AuditAggregate& aggregate,
                                  const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "marketplace,wash_volume_usd,share\n";
    for (const auto& s : aggregate.marketplace_shares) {
        out << csv_escape(s.marketplace) << ',' << format_usd(s.wash_volume_usd_cents) << ','
            << fmt_ratio(s.share) << '\n';
    }
}

void write_wtr_histogram_csv(const AuditAggregate& aggregate,
                             const std::filesystem::path& path) {
    auto out = open_out(path);
    static const char* kLabels[4] = {"[0,0.25)", "[0.25,0.5)", "[0.5,0.75)", "[0.75,1]"};
    out << "bucket,collections,share\n";
    for (int b = 0; b < 4; ++b) {
        out << kLabels[b] << ',' << aggregate.histogram.counts[b] << ','
            << fmt_ratio(aggregate.histogram.share[b]) << '\n';
    }
}

std::string sanitize_filename(const std::string& name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    if (out.empty()) out = "_";
    return out;
}

void write_collection_details(const AuditOutcome& outcome, const AuditConfig& config,
                              const std::filesystem::path& details_dir) {
    std::filesystem::create_directories(details_dir);
    using nlohmann::json;
    for (const WashReport& r : outcome.reports) {
        json j;
        j["collection_id"] = r.collection_id;
        j["k_used"] = r.k_used;
        j["k_lowered"] = r.k_lowered;
        j["lof_threshold"] = config.lof_threshold;
        j["tokens_traded"] = r.tokens_traded;
        j["wash_tokens"] = r.wash_tokens;
        j["wtr_tokens"] = r.wtr_tokens;
        j["wtr_volume"] = r.wtr_volume;
        json addrs = json::array();
        for (const auto& f : r.suspicious_addresses)
            addrs.push_back({{"address", f.address}, {"lof", f.lof}});
        j["suspicious_addresses"] = std::move(addrs);
        j["suspicious_tx_ids"] = r.suspicious_trades;
        auto out = open_out(details_dir / (sanitize_filename(r.collection_id) + ".json"));
        out << j.dump(2) << '\n';
    }
    for (const AuditSkip& s : outcome.skipped) {
        json j;
        j["collection_id"] = s.collection_id;
        j["skipped"] = true;
        j["reason"] = s.reason;
        auto out = open_out(details_dir / (sanitize_filename(s.collection_id) + ".json"));
        out << j.dump(2) << '\n';
    }
}

void write_lof_csv(const FeatureMatrix& features, const std::vector<lof::Score<double>>& scores,
                   const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "id,lrd,lof\n";
    for (std::size_t i = 0; i < features.addresses.size(); ++i) {
        out << csv_escape(features.addresses[i]) << ',' << fmt_ratio(scores[i].lrd) << ','
            << fmt_ratio(scores[i].lof) << '\n';
    }
}

}  // namespace nftaudit
