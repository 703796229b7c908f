#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "nftaudit/corpus.hpp"
#include "nftaudit/trade_graph.hpp"

namespace nftaudit {

// Per-address behavior summary fed to LOF, one row per address.
// Column order is fixed; see kFeatureNames.
inline constexpr int kFeatureDims = 7;
inline constexpr const char* kFeatureNames[kFeatureDims] = {
    "trade_count",        // trades the address participates in
    "mean_price_ratio",   // mean trade price / collection mean price
    "price_cv",           // coefficient of variation of trade prices
    "median_gap_s",       // median inter-trade gap, seconds
    "counterparty_div",   // unique counterparties / trade_count
    "self_loop_frac",     // fraction of trades with itself
    "clustering_coeff",   // from the trade graph
};

struct FeatureMatrix {
    std::string collection_id;
    std::vector<std::string> addresses;  // row ids, sorted
    Eigen::MatrixXd raw;                 // n x 7
    Eigen::MatrixXd standardized;        // z-scores; zero-variance columns -> 0
};

// Column-wise z-scores (population stddev); constant columns map to 0, so
// every entry is finite.
Eigen::MatrixXd zscore_columns(const Eigen::MatrixXd& raw);

FeatureMatrix extract_features(const Corpus& corpus, const std::string& collection_id,
                               const std::map<std::string, NodeMetrics>& graph_metrics);

}  // namespace nftaudit
