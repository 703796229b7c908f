#include "nftaudit/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nftaudit {

Eigen::MatrixXd zscore_columns(const Eigen::MatrixXd& raw) {
    Eigen::MatrixXd z = raw;
    const double n = static_cast<double>(raw.rows());
    if (n == 0) return z;
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        const double mean = raw.col(c).mean();
        const double var = (raw.col(c).array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        if (sd > 0.0)
            z.col(c) = (raw.col(c).array() - mean) / sd;
        else
            z.col(c).setZero();
    }
    return z;
}

FeatureMatrix extract_features(const Corpus& corpus, const std::string& collection_id,
                               const std::map<std::string, NodeMetrics>& graph_metrics) {
    const auto& positions = corpus.collection_records(collection_id);
    const auto& records = corpus.records();

    struct AddressTrades {
        std::vector<double> prices_usd;
        std::vector<UnixSeconds> times;  // canonical order, hence sorted
        std::set<std::string> counterparties;
        std::int64_t self_loops = 0;
    };
    std::map<std::string, AddressTrades> per_address;
    UsdCents collection_total = 0;
    for (std::size_t pos : positions) {
        const SaleRecord& r = records[pos];
        collection_total += r.price_usd_cents;
        const double price = usd_to_double(r.price_usd_cents);
        auto add = [&](const std::string& who, const std::string& other) {
            AddressTrades& at = per_address[who];
            at.prices_usd.push_back(price);
            at.times.push_back(r.block_time);
            at.counterparties.insert(other);
            if (r.buyer == r.seller) ++at.self_loops;
        };
        add(r.buyer, r.seller);
        if (r.seller != r.buyer) add(r.seller, r.buyer);
    }

    const double collection_mean =
        positions.empty() ? 0.0
                          : usd_to_double(collection_total) / static_cast<double>(positions.size());

    // Fallback gap for addresses with < 2 trades: the largest inter-trade gap
    // seen in the collection, or the collection time span when nobody has 2.
    double max_gap = 0.0;
    bool any_gap = false;
    for (const auto& [_, at] : per_address) {
        for (std::size_t i = 1; i < at.times.size(); ++i) {
            max_gap = std::max(max_gap, static_cast<double>(at.times[i] - at.times[i - 1]));
            any_gap = true;
        }
    }
    if (!any_gap && !positions.empty()) {
        const UnixSeconds lo = records[positions.front()].block_time;
        const UnixSeconds hi = records[positions.back()].block_time;
        max_gap = static_cast<double>(hi - lo);
    }

    FeatureMatrix fm;
    fm.collection_id = collection_id;
    fm.addresses.reserve(per_address.size());
    for (const auto& [addr, _] : per_address) fm.addresses.push_back(addr);

    const Eigen::Index n = static_cast<Eigen::Index>(fm.addresses.size());
    fm.raw.resize(n, kFeatureDims);
    for (Eigen::Index row = 0; row < n; ++row) {
        const AddressTrades& at = per_address.at(fm.addresses[static_cast<std::size_t>(row)]);
        const double count = static_cast<double>(at.prices_usd.size());

        double mean_price = 0.0;
        for (double p : at.prices_usd) mean_price += p;
        mean_price /= count;

        double cv = 0.0;
        if (at.prices_usd.size() >= 2 && mean_price > 0.0) {
            double var = 0.0;
            for (double p : at.prices_usd) var += (p - mean_price) * (p - mean_price);
            cv = std::sqrt(var / count) / mean_price;
        }

        double median_gap = max_gap;
        if (at.times.size() >= 2) {
            std::vector<double> gaps;
            gaps.reserve(at.times.size() - 1);
            for (std::size_t i = 1; i < at.times.size(); ++i)
                gaps.push_back(static_cast<double>(at.times[i] - at.times[i - 1]));
            std::sort(gaps.begin(), gaps.end());
            const std::size_t m = gaps.size();
            median_gap = m % 2 == 1 ? gaps[m / 2] : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
        }

        fm.raw(row, 0) = count;
        fm.raw(row, 1) = collection_mean > 0.0 ? mean_price / collection_mean : 1.0;
        fm.raw(row, 2) = cv;
        fm.raw(row, 3) = median_gap;
        fm.raw(row, 4) = static_cast<double>(at.counterparties.size()) / count;
        fm.raw(row, 5) = static_cast<double>(at.self_loops) / count;
        auto it = graph_metrics.find(fm.addresses[static_cast<std::size_t>(row)]);
        fm.raw(row, 6) = it == graph_metrics.end() ? 0.0 : it->second.clustering_coefficient;
    }
    fm.standardized = zscore_columns(fm.raw);
    return fm;
}

}  // namespace nftaudit
