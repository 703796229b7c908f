#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nftaudit/corpus.hpp"

namespace nftaudit {

// Directed multigraph of one collection's trades: nodes are addresses,
// one edge per sale (seller -> buyer). Self-loops are kept.
class TradeGraph {
public:
    struct Edge {
        std::size_t seller = 0;  // node index
        std::size_t buyer = 0;
        std::string tx_id;
        UsdCents price_usd_cents = 0;
        UnixSeconds block_time = 0;
    };

    static TradeGraph build(const Corpus& corpus, const std::string& collection_id);

    const std::string& collection_id() const { return collection_id_; }
    std::size_t node_count() const { return addresses_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    // Node indices are positions in this sorted address list.
    const std::vector<std::string>& addresses() const { return addresses_; }
    const std::vector<Edge>& edges() const { return edges_; }

    std::optional<std::size_t> index_of(const std::string& address) const;

    // Edge indices incident to a node.
    const std::vector<std::size_t>& out_edges(std::size_t node) const { return out_edges_[node]; }
    const std::vector<std::size_t>& in_edges(std::size_t node) const { return in_edges_[node]; }

    // Distinct out-neighbors (parallel edges collapsed), sorted; self kept out.
    const std::vector<std::size_t>& out_neighbors(std::size_t node) const {
        return out_neighbors_[node];
    }

    // Distinct neighbors: union of in- and out-neighbors, excluding the node
    // itself. Sorted.
    const std::vector<std::size_t>& neighbors(std::size_t node) const {
        return neighbors_[node];
    }

private:
    std::string collection_id_;
    std::vector<std::string> addresses_;
    std::unordered_map<std::string, std::size_t> address_index_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> out_edges_;
    std::vector<std::vector<std::size_t>> in_edges_;
    std::vector<std::vector<std::size_t>> out_neighbors_;
    std::vector<std::vector<std::size_t>> neighbors_;
};

struct NodeMetrics {
    std::string address;
    std::int64_t in_degree = 0;
    std::int64_t out_degree = 0;
    std::int64_t unique_neighbors = 0;      // k_i
    double clustering_coefficient = 0.0;    // C_i in [0, 1]
    std::int64_t self_loop_count = 0;
};

// C_i = |distinct directed edges among distinct neighbors| / (k_i * (k_i - 1));
// 0 when k_i < 2. Throws CorpusError on unknown address.
double clustering_coefficient(const TradeGraph& graph, const std::string& address);

std::map<std::string, NodeMetrics> node_metrics(const TradeGraph& graph);

// Edge-list dump: seller,buyer,tx_id,price_usd,block_time
void write_edge_list_csv(const TradeGraph& graph, const std::filesystem::path& path);

}  // namespace nftaudit
