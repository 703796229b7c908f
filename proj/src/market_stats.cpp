#include "nftaudit/market_stats.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "nftaudit/csv.hpp"

namespace nftaudit {

std::vector<QuarterlyVolume> quarterly_volume(const Corpus& corpus) {
    std::map<std::pair<int, int>, UsdCents> sums;
    for (const SaleRecord& r : corpus.records()) {
        const YearMonth ym = year_month_of(r.block_time);
        sums[{ym.year, quarter_of_month(ym.month)}] += r.price_usd_cents;
    }
    std::vector<QuarterlyVolume> out;
    out.reserve(sums.size());
    for (const auto& [key, total] : sums) out.push_back({key.first, key.second, total});
    return out;
}

std::vector<TimelinePoint> timeline(const Corpus& corpus) {
    if (corpus.records().empty()) return {};

    struct MonthAcc {
        std::int64_t tx_count = 0;
        std::set<std::string> buyers;
        std::set<std::string> sellers;
        UsdCents volume = 0;
    };
    std::map<YearMonth, MonthAcc> months;
    for (const SaleRecord& r : corpus.records()) {
        MonthAcc& acc = months[year_month_of(r.block_time)];
        ++acc.tx_count;
        acc.buyers.insert(r.buyer);
        acc.sellers.insert(r.seller);
        acc.volume += r.price_usd_cents;
    }

    std::vector<TimelinePoint> out;
    const YearMonth first = months.begin()->first;
    const YearMonth last = months.rbegin()->first;
    for (YearMonth ym = first;; ym = ym.next()) {
        TimelinePoint p;
        p.month = ym;
        if (auto it = months.find(ym); it != months.end()) {
            p.tx_count = it->second.tx_count;
            p.unique_buyers = static_cast<std::int64_t>(it->second.buyers.size());
            p.unique_sellers = static_cast<std::int64_t>(it->second.sellers.size());
            p.volume_usd_cents = it->second.volume;
        }
        out.push_back(p);
        if (ym == last) break;
    }
    return out;
}

LorenzCurve lorenz_from_weights(std::vector<std::int64_t> weights) {
    if (weights.empty()) throw CorpusError("no participants");
    std::sort(weights.begin(), weights.end());
    const std::size_t n = weights.size();

    std::vector<std::int64_t> prefix(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + weights[i];
    const std::int64_t total = prefix[n];

    LorenzCurve curve;
    curve.points.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n);
        const double y = total == 0 ? x
                                    : static_cast<double>(prefix[i]) / static_cast<double>(total);
        curve.points.emplace_back(x, y);
    }

    if (total == 0) {
        curve.gini = 0.0;
        return curve;
    }
    // Trapezoid rule over the step curve, evaluated exactly:
    //   2 * area = (2 * sum(prefix[1..n-1]) + total) / (n * total)
    //   gini     = 1 - 2 * area
    __int128 interior = 0;
    for (std::size_t i = 1; i < n; ++i) interior += prefix[i];
    const __int128 numerator =
        static_cast<__int128>(n) * total - (2 * interior + static_cast<__int128>(total));
    const __int128 denominator = static_cast<__int128>(n) * total;
    curve.gini = static_cast<double>(numerator) / static_cast<double>(denominator);
    return curve;
}

LorenzCurve lorenz(const Corpus& corpus, MarketSide side, LorenzWeight weight) {
    std::unordered_map<std::string, std::int64_t> per_address;
    for (const SaleRecord& r : corpus.records()) {
        const std::string& who = side == MarketSide::kBuyer ? r.buyer : r.seller;
        per_address[who] +=
            weight == LorenzWeight::kTradeCount ? 1 : static_cast<std::int64_t>(r.price_usd_cents);
    }
    std::vector<std::int64_t> weights;
    weights.reserve(per_address.size());
    for (const auto& [_, w] : per_address) weights.push_back(w);
    return lorenz_from_weights(std::move(weights));
}

namespace {

// pct = 100 * tokens / supply; 25/50/75 boundaries go to the higher bucket.
int concentration_bucket(std::int64_t tokens, std::int64_t supply) {
    if (tokens * 4 < supply) return 0;      // < 25%
    if (tokens * 2 < supply) return 1;      // < 50%
    if (tokens * 4 < supply * 3) return 2;  // < 75%
    return 3;
}

}  // namespace

ConcentrationResult holder_concentration(const std::vector<HolderSnapshot>& snapshots) {
    // Latest rank-1 snapshot per collection wins.
    std::map<std::string, const HolderSnapshot*> rank1;
    std::set<std::string> all_collections;
    for (const HolderSnapshot& h : snapshots) {
        all_collections.insert(h.collection_id);
        if (h.rank != 1) continue;
        auto [it, inserted] = rank1.emplace(h.collection_id, &h);
        if (!inserted && h.snapshot_time > it->second->snapshot_time) it->second = &h;
    }

    ConcentrationResult result;
    static const char* kLabels[4] = {"[0,25)", "[25,50)", "[50,75)", "[75,100]"};
    std::array<std::int64_t, 4> held_sum{};
    for (int b = 0; b < 4; ++b) result.buckets[b].interval = kLabels[b];

    for (const auto& [_, h] : rank1) {
        const int b = concentration_bucket(h->tokens_held, h->supply);
        ++result.buckets[b].collections;
        held_sum[b] += h->tokens_held;
    }
    result.skipped_collections =
        static_cast<std::int64_t>(all_collections.size()) -
        static_cast<std::int64_t>(rank1.size());

    const std::int64_t total = static_cast<std::int64_t>(rank1.size());
    for (int b = 0; b < 4; ++b) {
        auto& bucket = result.buckets[b];
        bucket.pct_of_collections =
            total == 0 ? 0.0 : 100.0 * static_cast<double>(bucket.collections) / total;
        bucket.avg_nft_ownership =
            bucket.collections == 0
                ? 0.0
                : static_cast<double>(held_sum[b]) / static_cast<double>(bucket.collections);
    }
    return result;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw CorpusError("cannot open " + path.string() + " for writing");
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

void write_quarterly_csv(const std::vector<QuarterlyVolume>& rows,
                         const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "year,quarter,total_usd\n";
    for (const auto& q : rows)
        out << q.year << ',' << q.quarter << ',' << format_usd(q.total_usd_cents) << '\n';
}

void write_timeline_csv(const std::vector<TimelinePoint>& rows,
                        const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "month,tx_count,unique_buyers,unique_sellers,volume_usd\n";
    char month[16];
    for (const auto& p : rows) {
        std::snprintf(month, sizeof(month), "%04d-%02d", p.month.year, p.month.month);
        out << month << ',' << p.tx_count << ',' << p.unique_buyers << ',' << p.unique_sellers
            << ',' << format_usd(p.volume_usd_cents) << '\n';
    }
}

void write_lorenz_csv(const LorenzCurve& curve, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "pop_fraction,cum_share\n";
    for (const auto& [x, y] : curve.points) out << fmt_double(x) << ',' << fmt_double(y) << '\n';
}

void write_concentration_csv(const ConcentrationResult& result,
                             const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "interval,pct_of_collections,avg_nft_ownership\n";
    char buf[64];
    for (const auto& b : result.buckets) {
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f", b.pct_of_collections, b.avg_nft_ownership);
        out << csv_escape(b.interval) << ',' << buf << '\n';
    }
}

}  // namespace nftaudit
