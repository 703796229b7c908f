#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nftaudit/corpus.hpp"
#include "nftaudit/features.hpp"
#include "nftaudit/lof.hpp"

namespace nftaudit {

// A trade is suspicious when a flagged address is on either side (kEither,
// the default, higher-recall reading) or only when both sides are flagged.
enum class TradeSuspicionRule { kEither, kBoth };

struct AuditConfig {
    int k = 20;
    double lof_threshold = 1.5;
    TradeSuspicionRule rule = TradeSuspicionRule::kEither;
    lof::RdConvention rd = lof::RdConvention::kNeighborKDistance;
    // Collections with fewer distinct addresses than this are skipped; from
    // there up to k+1 addresses, k falls back to n-1.
    int min_addresses = 3;
};

struct FlaggedAddress {
    std::string address;
    double lof = 0.0;
};

struct FlagResult {
    std::vector<FlaggedAddress> flagged;  // LOF > threshold, descending score
    int k_used = 0;
    bool k_lowered = false;
};

struct WashReport {
    std::string collection_id;
    std::int64_t tokens_traded = 0;  // tokens with >= 1 trade
    std::int64_t wash_tokens = 0;    // tokens with >= 1 suspicious trade
    double wtr_tokens = 0.0;         // wash_tokens / tokens_traded
    double wtr_volume = 0.0;         // suspicious USD / total USD
    std::vector<FlaggedAddress> suspicious_addresses;
    std::vector<std::string> suspicious_trades;  // tx ids, canonical order
    UsdCents wash_volume_usd_cents = 0;
    UsdCents total_volume_usd_cents = 0;
    std::map<std::string, UsdCents> per_marketplace_wash;
    int k_used = 0;
    bool k_lowered = false;
};

struct AuditSkip {
    std::string collection_id;
    std::string reason;
};

struct AuditOutcome {
    std::vector<WashReport> reports;  // ordered by collection_id
    std::vector<AuditSkip> skipped;
};

struct WtrHistogram {
    // Buckets over wtr_tokens: [0,0.25) [0.25,0.5) [0.5,0.75) [0.75,1].
    std::array<std::int64_t, 4> counts{};
    std::array<double, 4> share{};
};

struct MarketplaceShare {
    std::string marketplace;
    UsdCents wash_volume_usd_cents = 0;
    double share = 0.0;
};

struct AuditAggregate {
    WtrHistogram histogram;
    std::vector<MarketplaceShare> marketplace_shares;  // sorted by marketplace
};

// LOF over standardized features; ids with LOF > threshold. k is lowered to
// n-1 when the collection is smaller than k+1 points.
FlagResult flag_suspicious(const FeatureMatrix& features, const AuditConfig& config);

WashReport wash_report(const Corpus& corpus, const std::string& collection_id,
                       const FlagResult& flags,
                       TradeSuspicionRule rule = TradeSuspicionRule::kEither);

// Per-collection audits over the whole corpus; deterministic result order
// regardless of the number of worker threads.
AuditOutcome audit_corpus(const Corpus& corpus, const AuditConfig& config, int jobs = 1);

// Throws CorpusError on empty input.
AuditAggregate aggregate_audit(const std::vector<WashReport>& reports);

void write_audit_report_csv(const std::vector<WashReport>& reports,
                            const std::filesystem::path& path);
void write_marketplace_shares_csv(const AuditAggregate& aggregate,
                                  const std::filesystem::path& path);
void write_wtr_histogram_csv(const AuditAggregate& aggregate, const std::filesystem::path& path);

// One JSON detail file per collection (suspicious addresses with LOF scores,
// suspicious tx ids); skipped collections get {"skipped": true, ...}.
void write_collection_details(const AuditOutcome& outcome, const AuditConfig& config,
                              const std::filesystem::path& details_dir);

// Debug dump: id,lrd,lof for one scored collection.
void write_lof_csv(const FeatureMatrix& features,
                   const std::vector<lof::Score<double>>& scores,
                   const std::filesystem::path& path);

std::string sanitize_filename(const std::string& name);

}  // namespace nftaudit
