#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "nftaudit/corpus.hpp"

namespace nftaudit {

struct QuarterlyVolume {
    int year = 0;
    int quarter = 0;  // 1..4, Q1 = Jan-Mar
    UsdCents total_usd_cents = 0;

    bool operator==(const QuarterlyVolume&) const = default;
};

struct TimelinePoint {
    YearMonth month;
    std::int64_t tx_count = 0;
    std::int64_t unique_buyers = 0;
    std::int64_t unique_sellers = 0;
    UsdCents volume_usd_cents = 0;

    bool operator==(const TimelinePoint&) const = default;
};

struct LorenzCurve {
    // (population_fraction, cumulative_share), ascending by activity;
    // first point (0,0), last (1,1).
    std::vector<std::pair<double, double>> points;
    double gini = 0.0;  // in [0, 1)
};

enum class MarketSide { kBuyer, kSeller };
enum class LorenzWeight { kTradeCount, kUsdVolume };

struct ConcentrationBucket {
    std::string interval;  // "[0,25)", "[25,50)", "[50,75)", "[75,100]"
    std::int64_t collections = 0;
    double pct_of_collections = 0.0;
    double avg_nft_ownership = 0.0;
};

struct ConcentrationResult {
    std::array<ConcentrationBucket, 4> buckets;
    std::int64_t skipped_collections = 0;  // missing rank-1 snapshot
};

// One entry per (year, quarter) with at least one sale, chronological.
std::vector<QuarterlyVolume> quarterly_volume(const Corpus& corpus);

// One point per calendar month spanning the corpus, gap months included
// with zeros; buyers/sellers deduplicated per month.
std::vector<TimelinePoint> timeline(const Corpus& corpus);

// Lorenz curve over per-address activity (ascending), Gini via the trapezoid
// rule on the exact step curve. Throws CorpusError("no participants") on an
// empty corpus.
LorenzCurve lorenz(const Corpus& corpus, MarketSide side,
                   LorenzWeight weight = LorenzWeight::kTradeCount);

// Core curve builder over raw nonnegative weights; exact integer arithmetic,
// so equal weights give gini == 0 exactly.
LorenzCurve lorenz_from_weights(std::vector<std::int64_t> weights);

// Buckets collections by their rank-1 holder's share of supply.
// Boundaries 25/50/75 fall into the higher bucket; [75,100] is closed.
ConcentrationResult holder_concentration(const std::vector<HolderSnapshot>& snapshots);

void write_quarterly_csv(const std::vector<QuarterlyVolume>& rows,
                         const std::filesystem::path& path);
void write_timeline_csv(const std::vector<TimelinePoint>& rows,
                        const std::filesystem::path& path);
void write_lorenz_csv(const LorenzCurve& curve, const std::filesystem::path& path);
void write_concentration_csv(const ConcentrationResult& result,
                             const std::filesystem::path& path);

}  // namespace nftaudit
