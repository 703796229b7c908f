#include "nftaudit/trade_graph.hpp"

#include <algorithm>
#include <fstream>

namespace nftaudit {

TradeGraph TradeGraph::build(const Corpus& corpus, const std::string& collection_id) {
    const std::vector<std::size_t>& positions = corpus.collection_records(collection_id);

    TradeGraph g;
    g.collection_id_ = collection_id;

    for (std::size_t pos : positions) {
        const SaleRecord& r = corpus.records()[pos];
        g.addresses_.push_back(r.buyer);
        g.addresses_.push_back(r.seller);
    }
    std::sort(g.addresses_.begin(), g.addresses_.end());
    g.addresses_.erase(std::unique(g.addresses_.begin(), g.addresses_.end()),
                       g.addresses_.end());
    for (std::size_t i = 0; i < g.addresses_.size(); ++i) g.address_index_[g.addresses_[i]] = i;

    const std::size_t n = g.addresses_.size();
    g.out_edges_.resize(n);
    g.in_edges_.resize(n);
    g.edges_.reserve(positions.size());
    for (std::size_t pos : positions) {
        const SaleRecord& r = corpus.records()[pos];
        Edge e;
        e.seller = g.address_index_.at(r.seller);
        e.buyer = g.address_index_.at(r.buyer);
        e.tx_id = r.tx_id;
        e.price_usd_cents = r.price_usd_cents;
        e.block_time = r.block_time;
        const std::size_t edge_idx = g.edges_.size();
        g.out_edges_[e.seller].push_back(edge_idx);
        g.in_edges_[e.buyer].push_back(edge_idx);
        g.edges_.push_back(std::move(e));
    }

    g.out_neighbors_.resize(n);
    g.neighbors_.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        auto& outs = g.out_neighbors_[v];
        for (std::size_t ei : g.out_edges_[v]) outs.push_back(g.edges_[ei].buyer);
        std::sort(outs.begin(), outs.end());
        outs.erase(std::unique(outs.begin(), outs.end()), outs.end());

        auto& nbrs = g.neighbors_[v];
        nbrs = outs;
        for (std::size_t ei : g.in_edges_[v]) nbrs.push_back(g.edges_[ei].seller);
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        // Self-loops stay out of the neighbor set.
        auto self = std::lower_bound(nbrs.begin(), nbrs.end(), v);
        if (self != nbrs.end() && *self == v) nbrs.erase(self);
    }
    return g;
}

std::optional<std::size_t> TradeGraph::index_of(const std::string& address) const {
    auto it = address_index_.find(address);
    if (it == address_index_.end()) return std::nullopt;
    return it->second;
}

namespace {

// Distinct directed edges among the node's distinct neighbors; parallel
// edges count once; self-loops never counted (the pair (u, u) is skipped).
std::int64_t neighbor_edge_count(const TradeGraph& g, std::size_t node,
                                 std::vector<char>& in_neighborhood) {
    const auto& nbrs = g.neighbors(node);
    for (std::size_t u : nbrs) in_neighborhood[u] = 1;
    std::int64_t count = 0;
    for (std::size_t u : nbrs) {
        for (std::size_t v : g.out_neighbors(u)) {
            if (v != u && in_neighborhood[v]) ++count;
        }
    }
    for (std::size_t u : nbrs) in_neighborhood[u] = 0;
    return count;
}

double clustering_from_counts(std::int64_t edges_among, std::int64_t k) {
    if (k < 2) return 0.0;
    return static_cast<double>(edges_among) / (static_cast<double>(k) * static_cast<double>(k - 1));
}

}  // namespace

double clustering_coefficient(const TradeGraph& graph, const std::string& address) {
    auto idx = graph.index_of(address);
    if (!idx) throw CorpusError("unknown address '" + address + "'");
    std::vector<char> scratch(graph.node_count(), 0);
    const auto k = static_cast<std::int64_t>(graph.neighbors(*idx).size());
    return clustering_from_counts(neighbor_edge_count(graph, *idx, scratch), k);
}

std::map<std::string, NodeMetrics> node_metrics(const TradeGraph& graph) {
    std::map<std::string, NodeMetrics> result;
    std::vector<char> scratch(graph.node_count(), 0);
    for (std::size_t v = 0; v < graph.node_count(); ++v) {
        NodeMetrics m;
        m.address = graph.addresses()[v];
        m.in_degree = static_cast<std::int64_t>(graph.in_edges(v).size());
        m.out_degree = static_cast<std::int64_t>(graph.out_edges(v).size());
        m.unique_neighbors = static_cast<std::int64_t>(graph.neighbors(v).size());
        for (std::size_t ei : graph.out_edges(v))
            if (graph.edges()[ei].buyer == v) ++m.self_loop_count;
        m.clustering_coefficient =
            clustering_from_counts(neighbor_edge_count(graph, v, scratch), m.unique_neighbors);
        result.emplace(m.address, std::move(m));
    }
    return result;
}

void write_edge_list_csv(const TradeGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw CorpusError("cannot open " + path.string() + " for writing");
    out << "seller,buyer,tx_id,price_usd,block_time\n";
    for (const auto& e : graph.edges()) {
        out << graph.addresses()[e.seller] << ',' << graph.addresses()[e.buyer] << ',' << e.tx_id
            << ',' << format_usd(e.price_usd_cents) << ',' << format_iso8601_utc(e.block_time)
            << '\n';
    }
    if (!out) throw CorpusError("write failed: " + path.string());
}

}  // namespace nftaudit
